use occucert::certify::{CertificateSpec, Theorem};
use occucert::config::{parse_config, AuditTask, JobConfig, ProblemSpec, SetSpec, Task};
use occucert::job::{run, RunOptions, TaskReport};
use occucert::model::{BoundingBox, SetKind};
use occucert::poly::Polynomial;
use occucert::sdp::InteriorPoint;
use occucert::simulate::SimConfig;
use proptest::prelude::*;

fn poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((0u32..5, -1e3..1e3f64), 1..5).prop_map(|terms| {
        Polynomial::from_terms(1, terms.into_iter().map(|(e, c)| (vec![e], c))).unwrap()
    })
}

fn theorem() -> impl Strategy<Value = Theorem> {
    prop_oneof![
        Just(Theorem::DissipativeUpper),
        Just(Theorem::AttractiveLowerI),
        Just(Theorem::AttractiveLowerII),
    ]
}

fn task() -> impl Strategy<Value = Task> {
    let grid = || prop::collection::vec(1e-6..10.0f64, 1..4);
    prop_oneof![
        (theorem(), 1u32..8, grid(), grid())
            .prop_map(|(t, d, l, m)| Task::Verify(CertificateSpec::new(t, 2 * d, l, m))),
        (1e-5..1e-1f64, 1usize..100_000, any::<u64>(), 0usize..50).prop_map(|(dt, n, s, r)| {
            let mut c = SimConfig::new(dt, n, s);
            c.record_paths = r;
            Task::Simulate(c)
        }),
        ("[a-z]{1,8}\\.json", 1e-5..1e-1f64, 1usize..1000, any::<u64>()).prop_map(
            |(f, dt, n, seed)| Task::Audit(AuditTask {
                certificate: Some(f.into()),
                from_task: None,
                dt,
                n_paths: n,
                seed,
            })
        ),
    ]
}

fn job() -> impl Strategy<Value = JobConfig> {
    (
        poly(),
        poly(),
        -0.5..0.5f64,
        0.01..0.2f64,
        0.5..20.0f64,
        0.0..1.0f64,
        prop::collection::vec(task(), 1..5),
        prop::option::of("[a-z0-9-]{1,12}"),
    )
        .prop_map(|(f, s, x0, w, h, frac, tasks, name)| {
            let c = x0;
            JobConfig {
                name,
                problem: ProblemSpec {
                    drift: vec![f],
                    diffusion: vec![vec![s]],
                    initial_state: vec![x0],
                    safe: SetSpec {
                        inequalities: vec![Polynomial::univariate(&[1.0, 0.0, -1.0])],
                        kind: SetKind::OpenInterior,
                    },
                    target: SetSpec {
                        // (c + w - x)(x - c + w)
                        inequalities: vec![Polynomial::univariate(&[
                            w * w - c * c,
                            2.0 * c,
                            -1.0,
                        ])],
                        kind: SetKind::Closed,
                    },
                    horizon: h,
                    threshold: (0.01 + 0.98 * frac) * h,
                    bounding_box: BoundingBox::unit(1),
                },
                tasks,
                output_dir: "out/prop".into(),
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_inverts_serialize(j in job()) {
        let back = parse_config(&j.to_json());
        prop_assert!(back.is_ok(), "{:?}", back);
        prop_assert_eq!(back.unwrap(), j);
    }
}

#[test]
fn every_grid_point_appears_once() {
    let tmp = tempfile::tempdir().unwrap();
    let mut j = parse_config(include_str!("../../../configs/example2.json")).unwrap();
    j.output_dir = tmp.path().to_path_buf();
    j.tasks = vec![
        Task::Verify(CertificateSpec::new(
            Theorem::AttractiveLowerI,
            4,
            vec![1e-2, 1e-1, 1.0],
            vec![1.0, 2.0],
        )),
        Task::Verify(CertificateSpec::new(
            Theorem::DissipativeUpper,
            4,
            vec![0.5, 1.0],
            vec![],
        )),
    ];
    let report = run(&j, &RunOptions::default(), &InteriorPoint::default()).unwrap();
    for (task, t) in j.tasks.iter().zip(&report.tasks) {
        let (Task::Verify(spec), TaskReport::Verify(v)) = (task, t) else {
            panic!("unexpected task report {t:?}")
        };
        let mut want = spec.points();
        let mut got: Vec<_> = v.rows.iter().map(|r| (r.lambda, r.m)).collect();
        let key = |p: &(f64, Option<f64>)| (p.0.to_bits(), p.1.map(f64::to_bits));
        want.sort_by_key(key);
        got.sort_by_key(key);
        assert_eq!(got, want);
    }
}
