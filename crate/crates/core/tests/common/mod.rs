//! Oracles and fixtures shared by the integration tests and the acceptance
//! runner.
#![allow(dead_code)]

use std::collections::BTreeMap;

use occucert::bounds::{bound_lower1, bound_lower2, bound_upper};
use occucert::model::{BoundingBox, OccupationProblem, SdeModel, SemialgebraicSet, SetKind};
use occucert::poly::Polynomial;
use occucert::simulate::simulate_path;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

// ---- bound formulas against 50-digit references ----

#[derive(Deserialize)]
pub struct RefRow {
    pub v0: f64,
    pub lambda: f64,
    pub beta: f64,
    #[serde(default)]
    pub m: f64,
    pub horizon: f64,
    pub threshold: f64,
    pub value: String,
}

#[derive(Deserialize)]
pub struct BoundReference {
    pub upper: Vec<RefRow>,
    pub lower1: Vec<RefRow>,
    pub lower2: Vec<RefRow>,
}

pub fn bound_reference() -> BoundReference {
    serde_json::from_str(include_str!("../data/bound_reference.json")).unwrap()
}

fn worst(rows: &[RefRow], f: impl Fn(&RefRow) -> f64) -> f64 {
    rows.iter()
        .map(|r| {
            let want: f64 = r.value.parse().unwrap();
            let got = f(r);
            if got.is_finite() {
                (got - want).abs() / want.abs()
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Worst relative errors of the upper, first lower and second lower bound.
pub fn bound_reference_errors() -> [f64; 3] {
    let r = bound_reference();
    [
        worst(&r.upper, |r| {
            bound_upper(r.v0, r.lambda, r.beta, r.horizon, r.threshold).unwrap_or(f64::NAN)
        }),
        worst(&r.lower1, |r| {
            bound_lower1(r.v0, r.beta, r.m, r.lambda, r.horizon, r.threshold).unwrap_or(f64::NAN)
        }),
        worst(&r.lower2, |r| {
            bound_lower2(r.v0, r.beta, r.m, r.lambda, r.horizon, r.threshold).unwrap_or(f64::NAN)
        }),
    ]
}

// ---- brute-force generator ----

type Terms = BTreeMap<Vec<u32>, f64>;

fn terms_of(p: &Polynomial) -> Terms {
    p.to_records()
        .into_iter()
        .filter(|r| r.coefficient != 0.0)
        .map(|r| (r.exponents, r.coefficient))
        .collect()
}

fn add_into(acc: &mut Terms, e: Vec<u32>, c: f64) {
    let slot = acc.entry(e.clone()).or_insert(0.0);
    *slot += c;
    if *slot == 0.0 {
        acc.remove(&e);
    }
}

fn diff(p: &Terms, i: usize) -> Terms {
    let mut out = Terms::new();
    for (e, &c) in p {
        if e[i] > 0 {
            let mut e2 = e.clone();
            e2[i] -= 1;
            add_into(&mut out, e2, c * e[i] as f64);
        }
    }
    out
}

fn mul(a: &Terms, b: &Terms) -> Terms {
    let mut out = Terms::new();
    for (ea, &ca) in a {
        for (eb, &cb) in b {
            let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            add_into(&mut out, e, ca * cb);
        }
    }
    out
}

fn add(a: &Terms, b: &Terms, s: f64) -> Terms {
    let mut out = a.clone();
    for (e, &c) in b {
        add_into(&mut out, e.clone(), s * c);
    }
    out
}

/// `sum_i f_i d_i v + 1/2 sum_ij (sigma sigma^T)_ij d_i d_j v`, expanded term by
/// term on plain coefficient maps.
fn brute_generator(v: &Polynomial, drift: &[Polynomial], diffusion: &[Vec<Polynomial>]) -> Terms {
    let n = drift.len();
    let v = terms_of(v);
    let mut out = Terms::new();
    for i in 0..n {
        let dv = diff(&v, i);
        out = add(&out, &mul(&terms_of(&drift[i]), &dv), 1.0);
        for j in 0..n {
            let dij = diff(&dv, j);
            for k in 0..diffusion[i].len() {
                let sik = terms_of(&diffusion[i][k]);
                let sjk = terms_of(&diffusion[j][k]);
                out = add(&out, &mul(&mul(&sik, &sjk), &dij), 0.5);
            }
        }
    }
    out
}

fn random_poly(rng: &mut ChaCha8Rng, dim: usize, max_deg: u32) -> Polynomial {
    let n_terms = rng.random_range(1..=6);
    let terms: Vec<(Vec<u32>, f64)> = (0..n_terms)
        .map(|_| {
            let deg = rng.random_range(0..=max_deg);
            let mut e = vec![0u32; dim];
            for _ in 0..deg {
                e[rng.random_range(0..dim)] += 1;
            }
            (e, rng.random_range(-5i32..=5) as f64)
        })
        .collect();
    Polynomial::from_terms(dim, terms).unwrap()
}

/// Number of random cases (out of `n`) where the library generator differs
/// from the brute-force expansion. Integer coefficients keep both sides exact.
pub fn generator_mismatches(n: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for case in 0..n {
        let dim = 1 + case % 3;
        let m = rng.random_range(1..=2);
        let v = random_poly(&mut rng, dim, 6);
        let drift: Vec<Polynomial> = (0..dim).map(|_| random_poly(&mut rng, dim, 3)).collect();
        let diffusion: Vec<Vec<Polynomial>> = (0..dim)
            .map(|_| (0..m).map(|_| random_poly(&mut rng, dim, 2)).collect())
            .collect();
        let model = SdeModel::new(drift.clone(), diffusion.clone(), vec![0.0; dim]).unwrap();
        let got = terms_of(&occucert::poly::generator(&v, &model).unwrap());
        if got != brute_generator(&v, &drift, &diffusion) {
            bad += 1;
        }
    }
    bad
}

// ---- pathwise invariants ----

#[derive(Debug, Default)]
pub struct PathwiseTally {
    pub paths: usize,
    /// Stopped occupation differs from the unstopped path's occupation before
    /// its first exit.
    pub accumulator_mismatch: usize,
    pub post_freeze_growth: usize,
    /// `occupied + i_out` differs from `t` beyond rounding, or `occupied > t`.
    pub clock_mismatch: usize,
    pub frozen: usize,
}

pub fn pathwise_tally(problem: &OccupationProblem, n: usize, dt: f64, seed: u64) -> PathwiseTally {
    use rayon::prelude::*;
    (0..n as u64)
        .into_par_iter()
        .map(|id| {
            let o = simulate_path(problem, dt, seed, id, false);
            let s = &o.last;
            let mut t = PathwiseTally {
                paths: 1,
                ..Default::default()
            };
            t.accumulator_mismatch = (o.raw_steps_in != s.steps_in) as usize;
            t.post_freeze_growth = (o.post_freeze_growth != 0) as usize;
            let drift = (s.occupied() + s.i_out() - s.t()).abs();
            t.clock_mismatch = (s.steps_in > s.steps || drift > 1e-12 * s.t().max(1.0)) as usize;
            t.frozen = s.frozen as usize;
            t
        })
        .reduce(PathwiseTally::default, |a, b| PathwiseTally {
            paths: a.paths + b.paths,
            accumulator_mismatch: a.accumulator_mismatch + b.accumulator_mismatch,
            post_freeze_growth: a.post_freeze_growth + b.post_freeze_growth,
            clock_mismatch: a.clock_mismatch + b.clock_mismatch,
            frozen: a.frozen + b.frozen,
        })
}

// ---- randomized cubic systems ----

/// A random cubic drift on `(-1, 1)` with affine noise and an interval target.
/// Even seeds pull towards the target centre `c` through
/// `-k1 (x - c) - k3 (x - c)^3` plus a small quadratic term; odd seeds draw
/// all four drift coefficients freely and start outside the target.
pub fn random_cubic_system(seed: u64) -> OccupationProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: f64 = rng.random_range(-0.4..0.4);
    let w: f64 = rng.random_range(0.1..0.3);
    let drift = if seed % 2 == 0 {
        let k1 = rng.random_range(0.5..4.0);
        let k3 = rng.random_range(0.0..6.0);
        let q = rng.random_range(-0.5..0.5);
        // -k1 (x - c) - k3 (x - c)^3 + q x^2
        [
            k1 * c + k3 * c * c * c,
            -k1 - 3.0 * k3 * c * c,
            3.0 * k3 * c + q,
            -k3,
        ]
    } else {
        [
            rng.random_range(-0.5..0.5),
            rng.random_range(-5.0..-0.5),
            rng.random_range(-2.0..2.0),
            rng.random_range(-8.0..8.0),
        ]
    };
    let diffusion = [rng.random_range(0.05..0.4), rng.random_range(-0.3..0.3)];
    let x0 = if seed % 2 == 0 {
        c + rng.random_range(-0.4..0.4f64)
    } else {
        // start outside the target
        let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        c + side * (w + rng.random_range(0.05..0.4f64))
    }
    .clamp(-0.8, 0.8);
    let horizon = 1.0;
    let threshold = rng.random_range(0.05..0.6);
    let model = SdeModel::scalar(
        Polynomial::univariate(&drift),
        Polynomial::univariate(&diffusion),
        x0,
    )
    .unwrap();
    OccupationProblem::new(
        model,
        SemialgebraicSet::interval(-1.0, 1.0, SetKind::OpenInterior),
        SemialgebraicSet::interval(c - w, c + w, SetKind::Closed),
        horizon,
        threshold,
        BoundingBox::unit(1),
    )
}
