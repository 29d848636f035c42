//! Runs the tasks of a [`JobConfig`] and writes `report.json` plus per-task
//! artifacts into the job's output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::{
    admissible, build_program, grid_search, Certificate, CertificateSpec, CertifyError, GridPoint,
    PointStatus, Theorem,
};
use crate::config::{AuditTask, ConfigError, JobConfig, Task};
use crate::model::OccupationProblem;
use crate::sdp::{sdpa, SdpBackend};
use crate::simulate::{self, AuditResult, McEstimate, SimConfig, SimError};

pub const REPORT_FILE: &str = "report.json";

/// Exit status for a run that finished but hit solver numerical failures.
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("certificate {path}: {message}")]
    Certificate { path: PathBuf, message: String },
    #[error("task {task}: {source}")]
    Solver { task: usize, source: CertifyError },
    #[error("task {task}: {source}")]
    Simulation { task: usize, source: SimError },
    #[error("{path}: not a report: {message}")]
    Report { path: PathBuf, message: String },
}

impl RunError {
    /// 2 config, 3 solver, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Certificate { .. } => 2,
            RunError::Solver { source, .. } => match source {
                CertifyError::Degree(_) | CertifyError::EmptyGrid(_) | CertifyError::GridValue(_) => 2,
                _ => EXIT_SOLVER,
            },
            RunError::Simulation { source, .. } => match source {
                SimError::Io(_) | SimError::Csv(_) => 4,
                _ => 2,
            },
            RunError::Io { .. } | RunError::Report { .. } => 4,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Which task kinds a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    All,
    Verify,
    /// Simulate and audit tasks.
    Simulate,
}

impl Scope {
    fn includes(self, task: &Task) -> bool {
        match (self, task) {
            (Scope::All, _) => true,
            (Scope::Verify, Task::Verify(_)) => true,
            (Scope::Simulate, Task::Simulate(_) | Task::Audit(_)) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub scope: Scope,
    pub seed: Option<u64>,
    /// Write each grid point's SDP in SDPA sparse format.
    pub solver_dump: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            scope: Scope::All,
            seed: None,
            solver_dump: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub backend: String,
    pub config_name: Option<String>,
    pub seed_override: Option<u64>,
    pub threads: usize,
    pub started: String,
    pub finished: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub spec: CertificateSpec,
    /// One row per grid point, in grid order.
    pub rows: Vec<GridPoint>,
    pub best: Option<Certificate>,
    pub certificate_file: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sdpa_files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub estimate: McEstimate,
    pub csv: String,
    pub svg: Option<String>,
    pub audit: Option<AuditResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Where the certificate came from.
    pub source: String,
    /// `None` when the referenced verify task certified nothing.
    pub result: Option<AuditResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskReport {
    /// Not executed by the run that wrote the report.
    Pending,
    Verify(VerifyReport),
    Simulate(SimulateReport),
    Audit(AuditReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub provenance: Provenance,
    pub tasks: Vec<TaskReport>,
}

impl Report {
    /// Verify rows that ended in a numerical failure.
    pub fn solver_failures(&self) -> usize {
        self.tasks
            .iter()
            .filter_map(|t| match t {
                TaskReport::Verify(v) => Some(v.rows.as_slice()),
                _ => None,
            })
            .flatten()
            .filter(|r| r.status == PointStatus::NumericalFailure)
            .count()
    }

    pub fn exit_code(&self) -> i32 {
        if self.solver_failures() > 0 {
            EXIT_SOLVER
        } else {
            0
        }
    }
}

fn now() -> String {
    humantime::format_rfc3339_seconds(SystemTime::now()).to_string()
}

fn fmt_param(x: f64) -> String {
    format!("{x:e}")
}

fn certificate_name(task: usize) -> String {
    format!("task{task}-certificate.json")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let text = serde_json::to_string_pretty(value).expect("report types serialize");
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn load_certificate(path: &Path) -> Result<Certificate, RunError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| RunError::Certificate {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load_report(dir: &Path) -> Result<Report, RunError> {
    let path = dir.join(REPORT_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| RunError::Report {
        path,
        message: e.to_string(),
    })
}

fn run_verify(
    problem: &OccupationProblem,
    spec: &CertificateSpec,
    index: usize,
    dir: &Path,
    opts: &RunOptions,
    backend: &dyn SdpBackend,
) -> Result<VerifyReport, RunError> {
    let solver = |source| RunError::Solver { task: index, source };
    let mut sdpa_files = Vec::new();
    if opts.solver_dump {
        let (normalized, _) = problem.normalized();
        for (l, m) in spec.points() {
            if !admissible(spec.theorem, problem, l, m) {
                continue;
            }
            let bp = build_program(&normalized, spec.theorem, l, m, spec.degree).map_err(solver)?;
            let name = match m {
                Some(m) => format!("task{index}-l{}-m{}.dat-s", fmt_param(l), fmt_param(m)),
                None => format!("task{index}-l{}.dat-s", fmt_param(l)),
            };
            let path = dir.join(&name);
            let file = fs::File::create(&path).map_err(io_err(&path))?;
            sdpa::write_sdpa(&bp.program.sdp, std::io::BufWriter::new(file))
                .map_err(io_err(&path))?;
            sdpa_files.push(name);
        }
    }
    let grid = grid_search(problem, spec, backend).map_err(solver)?;
    let certificate_file = match &grid.best {
        Some(c) => {
            let name = certificate_name(index);
            write_json(&dir.join(&name), c)?;
            Some(name)
        }
        None => None,
    };
    Ok(VerifyReport {
        spec: grid.spec,
        rows: grid.points,
        best: grid.best,
        certificate_file,
        sdpa_files,
    })
}

fn run_simulate(
    problem: &OccupationProblem,
    cfg: &SimConfig,
    index: usize,
    dir: &Path,
) -> Result<SimulateReport, RunError> {
    let sim = |source| RunError::Simulation { task: index, source };
    let estimate = simulate::estimate(problem, cfg).map_err(sim)?;
    let stem = format!("task{index}-paths");
    let paths = simulate::export_paths(problem, cfg, dir, &stem).map_err(sim)?;
    let audit = match &cfg.audit {
        Some(c) => Some(simulate::audit_expectation(problem, c, cfg).map_err(sim)?),
        None => None,
    };
    Ok(SimulateReport {
        estimate,
        csv: format!("{stem}.csv"),
        svg: (!paths.is_empty()).then(|| format!("{stem}.svg")),
        audit,
    })
}

fn run_audit(
    problem: &OccupationProblem,
    task: &AuditTask,
    index: usize,
    dir: &Path,
    done: &[TaskReport],
) -> Result<AuditReport, RunError> {
    let (source, cert) = match (&task.certificate, task.from_task) {
        (Some(p), _) => {
            let path = if p.is_absolute() {
                p.clone()
            } else {
                dir.join(p)
            };
            (p.display().to_string(), Some(load_certificate(&path)?))
        }
        (None, Some(j)) => {
            let source = format!("task {j}");
            match &done[j] {
                TaskReport::Verify(v) => (source, v.best.clone()),
                _ => {
                    // verify ran in an earlier invocation
                    let path = dir.join(certificate_name(j));
                    let cert = if path.exists() {
                        Some(load_certificate(&path)?)
                    } else {
                        let prev = load_report(dir).ok();
                        match prev.as_ref().and_then(|r| r.tasks.get(j)) {
                            Some(TaskReport::Verify(_)) => None,
                            _ => {
                                return Err(RunError::Io {
                                    path,
                                    source: std::io::Error::new(
                                        std::io::ErrorKind::NotFound,
                                        "run the verify task first",
                                    ),
                                })
                            }
                        }
                    };
                    (source, cert)
                }
            }
        }
        (None, None) => unreachable!("validated config"),
    };
    let result = match cert {
        Some(c) => Some(
            simulate::audit_expectation(problem, &c, &task.sim_config())
                .map_err(|source| RunError::Simulation { task: index, source })?,
        ),
        None => None,
    };
    Ok(AuditReport { source, result })
}

/// Executes the in-scope tasks sequentially and writes `report.json`.
///
/// Entries for tasks outside the scope are carried over from an existing
/// report in the same directory when it has the same task count.
pub fn run(job: &JobConfig, opts: &RunOptions, backend: &dyn SdpBackend) -> Result<Report, RunError> {
    let mut job = job.clone();
    if let Some(seed) = opts.seed {
        job.override_seed(seed);
    }
    let problem = job.problem()?;
    let dir = job.output_dir.as_path();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let started = now();
    let mut done: Vec<TaskReport> = vec![TaskReport::Pending; job.tasks.len()];
    for (i, task) in job.tasks.iter().enumerate() {
        if !opts.scope.includes(task) {
            continue;
        }
        log::info!("task {i}: {}", task.kind());
        let t0 = std::time::Instant::now();
        done[i] = match task {
            Task::Verify(spec) => {
                TaskReport::Verify(run_verify(&problem, spec, i, dir, opts, backend)?)
            }
            Task::Simulate(cfg) => TaskReport::Simulate(run_simulate(&problem, cfg, i, dir)?),
            Task::Audit(a) => TaskReport::Audit(run_audit(&problem, a, i, dir, &done)?),
        };
        log::info!("task {i}: done in {:.1?}", t0.elapsed());
    }
    if let Ok(prev) = load_report(dir) {
        if prev.tasks.len() == done.len() {
            for (new, old) in done.iter_mut().zip(prev.tasks) {
                if *new == TaskReport::Pending {
                    *new = old;
                }
            }
        }
    }
    let report = Report {
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            backend: backend.name().to_string(),
            config_name: job.name.clone(),
            seed_override: opts.seed,
            threads: rayon::current_num_threads(),
            started,
            finished: now(),
        },
        tasks: done,
    };
    write_json(&dir.join(REPORT_FILE), &report)?;
    Ok(report)
}

fn fmt_opt(x: Option<f64>, prec: usize) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.prec$}"))
}

fn status_name(s: PointStatus) -> &'static str {
    match s {
        PointStatus::Certified => "certified",
        PointStatus::Infeasible => "infeasible",
        PointStatus::Rejected => "rejected",
        PointStatus::NumericalFailure => "numerical-failure",
    }
}

/// Plain-text tables for a report.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let p = &report.provenance;
    let _ = writeln!(
        out,
        "{} (occucert {}, backend {}, {} threads)",
        p.config_name.as_deref().unwrap_or("job"),
        p.version,
        p.backend,
        p.threads
    );
    let _ = writeln!(out, "started {}  finished {}", p.started, p.finished);
    if let Some(s) = p.seed_override {
        let _ = writeln!(out, "seed override {s}");
    }
    for (i, t) in report.tasks.iter().enumerate() {
        let _ = writeln!(out);
        match t {
            TaskReport::Pending => {
                let _ = writeln!(out, "[{i}] not run");
            }
            TaskReport::Verify(v) => {
                let _ = writeln!(out, "[{i}] verify {} d={}", v.spec.theorem, v.spec.degree);
                let _ = writeln!(
                    out,
                    "  {:>10} {:>8} {:<18} {:>8} {:>12}",
                    "lambda", "M", "status", "bound", "raw"
                );
                for r in &v.rows {
                    let _ = writeln!(
                        out,
                        "  {:>10} {:>8} {:<18} {:>8} {:>12}",
                        fmt_param(r.lambda),
                        r.m.map_or("-".into(), fmt_param),
                        status_name(r.status),
                        fmt_opt(r.bound, 4),
                        r.raw_bound.map_or("-".into(), |x| format!("{x:.5e}")),
                    );
                }
                match &v.best {
                    Some(c) => {
                        let kind = if c.theorem == Theorem::DissipativeUpper {
                            "upper"
                        } else {
                            "lower"
                        };
                        let _ = writeln!(
                            out,
                            "  best {kind} bound {:.4} at lambda={} (beta={:.3e}, v(x0)={:.6})",
                            c.bound,
                            fmt_param(c.lambda),
                            c.beta,
                            c.v0
                        );
                    }
                    None => {
                        let _ = writeln!(out, "  no certificate");
                    }
                }
            }
            TaskReport::Simulate(s) => {
                let e = &s.estimate;
                let _ = writeln!(
                    out,
                    "[{i}] simulate p_hat={:.4} 95% CI [{:.4}, {:.4}] ({}/{} paths, dt={}, seed {})",
                    e.p_hat, e.ci_lower, e.ci_upper, e.n_success, e.n_paths, e.dt, e.seed
                );
                let _ = writeln!(
                    out,
                    "  exits {}  numerical failures {}  paths {}",
                    e.n_safety_violations, e.n_failed_numerical, s.csv
                );
                if let Some(a) = &s.audit {
                    render_audit(&mut out, a);
                }
            }
            TaskReport::Audit(a) => {
                let _ = writeln!(out, "[{i}] audit of {}", a.source);
                match &a.result {
                    Some(r) => render_audit(&mut out, r),
                    None => {
                        let _ = writeln!(out, "  no certificate to audit");
                    }
                }
            }
        }
    }
    out
}

fn render_audit(out: &mut String, a: &AuditResult) {
    let op = match a.side {
        simulate::AuditSide::AtMost => "<=",
        simulate::AuditSide::AtLeast => ">=",
    };
    let _ = writeln!(
        out,
        "  {}: E[Z] = {:.5} +- {:.1e} {op} {:.5} ? {}",
        a.theorem,
        a.mean,
        a.std_error,
        a.limit,
        if a.holds { "holds" } else { "VIOLATED" }
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ProblemSpec, SetSpec};
    use crate::model::{BoundingBox, SetKind};
    use crate::poly::Polynomial;
    use crate::sdp::InteriorPoint;

    fn job(dir: &Path, tasks: Vec<Task>) -> JobConfig {
        let x = |c: &[f64]| Polynomial::univariate(c);
        JobConfig {
            name: Some("ou".into()),
            problem: ProblemSpec {
                drift: vec![x(&[0.0, -1.0])],
                diffusion: vec![vec![x(&[0.3])]],
                initial_state: vec![0.0],
                safe: SetSpec {
                    inequalities: vec![x(&[1.0, 0.0, -1.0])],
                    kind: SetKind::OpenInterior,
                },
                target: SetSpec {
                    inequalities: vec![x(&[0.25, 0.0, -1.0])],
                    kind: SetKind::Closed,
                },
                horizon: 1.0,
                threshold: 0.5,
                bounding_box: BoundingBox::unit(1),
            },
            tasks,
            output_dir: dir.to_path_buf(),
        }
    }

    #[test]
    fn simulate_only_job_has_estimate_and_no_certificates() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = SimConfig::new(1e-2, 200, 1);
        cfg.record_paths = 3;
        let j = job(tmp.path(), vec![Task::Simulate(cfg)]);
        let r = run(&j, &RunOptions::default(), &InteriorPoint::default()).unwrap();
        assert_eq!(r.tasks.len(), 1);
        let TaskReport::Simulate(s) = &r.tasks[0] else {
            panic!("{r:?}")
        };
        assert_eq!(s.estimate.n_paths, 200);
        assert!(tmp.path().join("task0-paths.csv").exists());
        assert!(tmp.path().join("task0-paths.svg").exists());
        assert_eq!(load_report(tmp.path()).unwrap(), r);
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn verify_then_audit_across_runs() {
        let tmp = tempfile::tempdir().unwrap();
        let spec = CertificateSpec::new(Theorem::DissipativeUpper, 4, vec![0.5, 1.0], vec![]);
        let audit = AuditTask {
            certificate: None,
            from_task: Some(0),
            dt: 1e-2,
            n_paths: 200,
            seed: 0,
        };
        let j = job(tmp.path(), vec![Task::Verify(spec), Task::Audit(audit)]);
        let backend = InteriorPoint::default();
        let opts = RunOptions {
            scope: Scope::Verify,
            solver_dump: true,
            ..Default::default()
        };
        let r = run(&j, &opts, &backend).unwrap();
        assert!(matches!(r.tasks[1], TaskReport::Pending));
        let TaskReport::Verify(v) = &r.tasks[0] else {
            panic!()
        };
        assert_eq!(v.rows.len(), 2);
        assert_eq!(v.sdpa_files.len(), 2);
        assert!(v.best.is_some());

        let opts = RunOptions {
            scope: Scope::Simulate,
            seed: Some(9),
            ..Default::default()
        };
        let r = run(&j, &opts, &backend).unwrap();
        assert!(matches!(r.tasks[0], TaskReport::Verify(_)));
        let TaskReport::Audit(a) = &r.tasks[1] else {
            panic!()
        };
        assert!(a.result.as_ref().unwrap().holds);
        let text = render_text(&r);
        assert!(text.contains("dissipative-upper"), "{text}");
    }
}
