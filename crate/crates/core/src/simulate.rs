//! Euler-Maruyama Monte Carlo over the stopped process.
//!
//! A path freezes at the first iterate outside the safe set. Occupation of the
//! target accrues per step from the pre-step state (left-endpoint rule) and is
//! tracked as an integer step count, so `occupied + i_out = t` holds exactly.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds;
use crate::certify::{Certificate, Theorem};
use crate::model::OccupationProblem;
use crate::poly::Polynomial;

/// Time step used in the reference experiments.
pub const DEFAULT_DT: f64 = 2e-3;
pub const DEFAULT_PATHS: usize = 100_000;
/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("time step must be positive and finite, got {0}")]
    Step(f64),
    #[error("at least one path is required")]
    NoPaths,
    #[error("certificate dimension {found} does not match the problem ({expected})")]
    Dimension { expected: usize, found: usize },
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    /// Number of trajectories to export.
    #[serde(default)]
    pub record_paths: usize,
    /// Certificate whose martingale is traced along the paths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<Certificate>,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_paths() -> usize {
    DEFAULT_PATHS
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: DEFAULT_DT,
            n_paths: DEFAULT_PATHS,
            seed: 0,
            record_paths: 0,
            audit: None,
        }
    }
}

impl SimConfig {
    pub fn new(dt: f64, n_paths: usize, seed: u64) -> Self {
        SimConfig {
            dt,
            n_paths,
            seed,
            ..Default::default()
        }
    }

    pub fn check(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::Step(self.dt));
        }
        if self.n_paths == 0 {
            return Err(SimError::NoPaths);
        }
        Ok(())
    }
}

/// Dense evaluation of a fixed set of polynomials at one point, sharing a
/// table of coordinate powers.
#[derive(Debug, Clone)]
struct CompiledPolys {
    dim: usize,
    max_deg: usize,
    /// per polynomial: (coefficient, exponent offset into `exps`)
    polys: Vec<Vec<(f64, usize)>>,
    exps: Vec<u32>,
}

impl CompiledPolys {
    fn new(dim: usize, ps: &[&Polynomial]) -> Self {
        let mut exps = Vec::new();
        let mut polys = Vec::with_capacity(ps.len());
        let mut max_deg = 0;
        for p in ps {
            let mut terms = Vec::with_capacity(p.n_terms());
            for (m, c) in p.terms() {
                terms.push((c, exps.len()));
                for &e in m.exponents() {
                    max_deg = max_deg.max(e as usize);
                    exps.push(e);
                }
            }
            polys.push(terms);
        }
        CompiledPolys {
            dim,
            max_deg,
            polys,
            exps,
        }
    }

    fn powers(&self, x: &[f64], table: &mut Vec<f64>) {
        let w = self.max_deg + 1;
        table.resize(self.dim * w, 0.0);
        for (i, &xi) in x.iter().enumerate() {
            let row = &mut table[i * w..(i + 1) * w];
            row[0] = 1.0;
            for k in 1..w {
                row[k] = row[k - 1] * xi;
            }
        }
    }

    fn eval(&self, which: usize, table: &[f64]) -> f64 {
        let w = self.max_deg + 1;
        self.polys[which]
            .iter()
            .map(|&(c, off)| {
                let mut t = c;
                for i in 0..self.dim {
                    t *= table[i * w + self.exps[off + i] as usize];
                }
                t
            })
            .sum()
    }
}

/// The polynomial data a step needs, compiled once per problem.
#[derive(Debug, Clone)]
pub struct Stepper {
    n: usize,
    m: usize,
    compiled: CompiledPolys,
    n_safe: usize,
    n_target: usize,
    target_closed: bool,
    safe_closed: bool,
    buf: Vec<f64>,
}

impl Stepper {
    pub fn new(problem: &OccupationProblem) -> Self {
        let model = &problem.model;
        let (n, m) = (model.dimension(), model.brownian_dim());
        let mut ps: Vec<&Polynomial> = model.drift().iter().collect();
        ps.extend(model.diffusion().iter().flatten());
        ps.extend(problem.safe.inequalities());
        ps.extend(problem.target.inequalities());
        use crate::model::SetKind;
        Stepper {
            n,
            m,
            compiled: CompiledPolys::new(n, &ps),
            n_safe: problem.safe.inequalities().len(),
            n_target: problem.target.inequalities().len(),
            target_closed: problem.target.kind() == SetKind::Closed,
            safe_closed: problem.safe.kind() == SetKind::Closed,
            buf: Vec::new(),
        }
    }

    fn g(&self, k: usize) -> usize {
        self.n + self.n * self.m + k
    }

    fn in_set(&self, first: usize, count: usize, closed: bool) -> bool {
        (first..first + count).all(|k| {
            let v = self.compiled.eval(k, &self.buf);
            if closed {
                v >= 0.0
            } else {
                v > 0.0
            }
        })
    }

    fn load(&mut self, x: &[f64]) {
        let mut buf = std::mem::take(&mut self.buf);
        self.compiled.powers(x, &mut buf);
        self.buf = buf;
    }

    pub fn in_target(&mut self, x: &[f64]) -> bool {
        self.load(x);
        self.in_set(self.g(self.n_safe), self.n_target, self.target_closed)
    }

    pub fn in_safe(&mut self, x: &[f64]) -> bool {
        self.load(x);
        self.in_set(self.g(0), self.n_safe, self.safe_closed)
    }

    /// Euler-Maruyama update of `x` in place; returns whether `x` was in the
    /// target before the update.
    fn advance(&mut self, x: &mut [f64], dt: f64, noise: &[f64]) -> bool {
        self.load(x);
        let inside = self.in_set(self.g(self.n_safe), self.n_target, self.target_closed);
        let sq = dt.sqrt();
        let mut dx = [0.0f64; 8];
        let mut dx_heap;
        let dx: &mut [f64] = if self.n <= 8 {
            &mut dx[..self.n]
        } else {
            dx_heap = vec![0.0; self.n];
            &mut dx_heap
        };
        for i in 0..self.n {
            let mut d = self.compiled.eval(i, &self.buf) * dt;
            for k in 0..self.m {
                d += self.compiled.eval(self.n + i * self.m + k, &self.buf) * sq * noise[k];
            }
            dx[i] = d;
        }
        for i in 0..self.n {
            x[i] += dx[i];
        }
        inside
    }
}

/// State of one stopped path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    pub steps: u64,
    pub x: Vec<f64>,
    /// Steps whose pre-step state was in the target.
    pub steps_in: u64,
    pub frozen: bool,
    /// Non-finite state reached while still inside the safe set.
    pub failed: bool,
    dt: f64,
}

impl PathState {
    pub fn start(x0: &[f64], dt: f64) -> Self {
        PathState {
            steps: 0,
            x: x0.to_vec(),
            steps_in: 0,
            frozen: false,
            failed: false,
            dt,
        }
    }

    pub fn t(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn occupied(&self) -> f64 {
        self.steps_in as f64 * self.dt
    }

    pub fn i_out(&self) -> f64 {
        (self.steps - self.steps_in) as f64 * self.dt
    }

    /// Two-speed clock `lambda (2 O - t)`.
    pub fn y(&self, lambda: f64) -> f64 {
        lambda * (2.0 * self.occupied() - self.t())
    }
}

/// One step of the stopped process.
pub fn step(state: &PathState, stepper: &mut Stepper, noise: &[f64]) -> PathState {
    let mut next = state.clone();
    advance_in_place(&mut next, stepper, noise);
    next
}

fn advance_in_place(state: &mut PathState, stepper: &mut Stepper, noise: &[f64]) {
    state.steps += 1;
    if state.frozen || state.failed {
        return;
    }
    let inside = stepper.advance(&mut state.x, state.dt, noise);
    if inside {
        state.steps_in += 1;
    }
    if state.x.iter().any(|v| !v.is_finite()) {
        state.failed = true;
    } else if !stepper.in_safe(&state.x) {
        state.frozen = true;
    }
}

fn path_rng(seed: u64, path_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_id);
    rng
}

/// Step counts for the horizon and the threshold.
fn step_counts(problem: &OccupationProblem, dt: f64) -> (u64, u64) {
    let h = (problem.horizon / dt - 1e-9).ceil().max(0.0) as u64;
    let k = (problem.threshold / dt - 1e-9).ceil().max(0.0) as u64;
    (h, k)
}

/// Result of simulating one path to `tau_K ^ H`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathOutcome {
    pub path_id: u64,
    pub last: PathState,
    pub success: bool,
    /// Occupation accumulated on the unstopped path up to its first exit,
    /// counted independently of the freeze logic.
    pub raw_steps_in: u64,
    /// Occupation growth observed after the freeze (must stay zero).
    pub post_freeze_growth: u64,
    pub trace: Option<Vec<PathState>>,
}

/// Simulates path `path_id` with its own random stream.
pub fn simulate_path(
    problem: &OccupationProblem,
    dt: f64,
    seed: u64,
    path_id: u64,
    record: bool,
) -> PathOutcome {
    let mut steppers = (Stepper::new(problem), Stepper::new(problem));
    run_path(problem, &mut steppers, dt, seed, path_id, record)
}

fn run_path(
    problem: &OccupationProblem,
    (stepper, raw_stepper): &mut (Stepper, Stepper),
    dt: f64,
    seed: u64,
    path_id: u64,
    record: bool,
) -> PathOutcome {
    let (h_steps, k_steps) = step_counts(problem, dt);
    let m = problem.model.brownian_dim();
    let mut rng = path_rng(seed, path_id);
    let mut noise = vec![0.0; m];
    let mut state = PathState::start(problem.model.initial_state(), dt);
    // unstopped copy driven by the same noise
    let mut raw = problem.model.initial_state().to_vec();
    let mut raw_exited = false;
    let mut raw_steps_in = 0;
    let mut frozen_at = None;
    let mut trace = record.then(|| vec![state.clone()]);
    while state.steps < h_steps && state.steps_in < k_steps {
        for z in noise.iter_mut() {
            *z = StandardNormal.sample(&mut rng);
        }
        if !raw_exited {
            let inside = raw_stepper.advance(&mut raw, dt, &noise);
            if inside {
                raw_steps_in += 1;
            }
            if raw.iter().any(|v| !v.is_finite()) || !raw_stepper.in_safe(&raw) {
                raw_exited = true;
            }
        }
        advance_in_place(&mut state, stepper, &noise);
        if state.frozen && frozen_at.is_none() {
            frozen_at = Some(state.steps_in);
        }
        if let Some(t) = trace.as_mut() {
            t.push(state.clone());
        }
    }
    let post_freeze_growth = frozen_at.map_or(0, |s| state.steps_in - s);
    PathOutcome {
        path_id,
        success: state.steps_in >= k_steps && !state.failed,
        last: state,
        raw_steps_in,
        post_freeze_growth,
        trace,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub p_hat: f64,
    /// Half-width of the 95% Wilson interval.
    pub ci_halfwidth: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub n_paths: usize,
    pub n_success: usize,
    /// Paths frozen at the safe-set boundary.
    pub n_safety_violations: usize,
    pub n_failed_numerical: usize,
    pub dt: f64,
    pub seed: u64,
}

/// Wilson score interval `(center, halfwidth)` at 95%.
pub fn wilson(successes: usize, n: usize) -> (f64, f64) {
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z95 * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    (center, half)
}

/// `P(O_T(H) >= K)` by Monte Carlo.
pub fn estimate(problem: &OccupationProblem, config: &SimConfig) -> Result<McEstimate, SimError> {
    config.check()?;
    let outcomes: Vec<(bool, bool, bool)> = (0..config.n_paths as u64)
        .into_par_iter()
        .map_init(
            || (Stepper::new(problem), Stepper::new(problem)),
            |st, id| {
                let o = run_path(problem, st, config.dt, config.seed, id, false);
                (o.success, o.last.frozen, o.last.failed)
            },
        )
        .collect();
    let n_success = outcomes.iter().filter(|o| o.0).count();
    let n_frozen = outcomes.iter().filter(|o| o.1).count();
    let n_failed = outcomes.iter().filter(|o| o.2).count();
    let (center, half) = wilson(n_success, config.n_paths);
    // rounding can push an endpoint past p_hat when it sits at 0 or 1
    let p_hat = n_success as f64 / config.n_paths as f64;
    Ok(McEstimate {
        p_hat,
        ci_halfwidth: half,
        ci_lower: (center - half).clamp(0.0, p_hat),
        ci_upper: (center + half).clamp(p_hat, 1.0),
        n_paths: config.n_paths,
        n_success,
        n_safety_violations: n_frozen,
        n_failed_numerical: n_failed,
        dt: config.dt,
        seed: config.seed,
    })
}

/// Direction of the expectation inequality checked by an audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditSide {
    /// `E[Z_tau] <= limit`
    AtMost,
    /// `E[Z_tau] >= limit`
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditResult {
    pub theorem: Theorem,
    pub mean: f64,
    pub std_error: f64,
    pub limit: f64,
    pub side: AuditSide,
    pub n_paths: usize,
    /// The inequality holds within three standard errors.
    pub holds: bool,
}

/// Value of the theorem's score process at a stopped state.
pub fn score(theorem: Theorem, v: &Polynomial, lambda: f64, state: &PathState) -> f64 {
    let vx = v.eval(&state.x);
    match theorem {
        Theorem::DissipativeUpper => (lambda * state.occupied()).exp() * vx,
        Theorem::AttractiveLowerI => vx * (-lambda * state.i_out()).exp(),
        Theorem::AttractiveLowerII => vx * state.y(lambda).exp(),
    }
}

/// The proof's bound on `E[Z_tau]` at `tau = tau_K ^ H`.
pub fn audit_limit(problem: &OccupationProblem, cert: &Certificate) -> (f64, AuditSide) {
    let (l, b) = (cert.lambda, cert.beta);
    match cert.theorem {
        Theorem::DissipativeUpper => (
            cert.v0 + b * bounds::growth_integral(l, problem.horizon),
            AuditSide::AtMost,
        ),
        Theorem::AttractiveLowerI => (cert.v0 - b.abs() * problem.horizon, AuditSide::AtLeast),
        Theorem::AttractiveLowerII => (
            cert.v0 + bounds::drift_gain(b, l, problem.threshold),
            AuditSide::AtLeast,
        ),
    }
}

/// Empirical mean of the certificate's score process at `tau_K ^ H`.
pub fn audit_expectation(
    problem: &OccupationProblem,
    cert: &Certificate,
    config: &SimConfig,
) -> Result<AuditResult, SimError> {
    config.check()?;
    if cert.v.dim() != problem.dimension() {
        return Err(SimError::Dimension {
            expected: problem.dimension(),
            found: cert.v.dim(),
        });
    }
    let zs: Vec<f64> = (0..config.n_paths as u64)
        .into_par_iter()
        .map_init(
            || (Stepper::new(problem), Stepper::new(problem)),
            |st, id| {
                let o = run_path(problem, st, config.dt, config.seed, id, false);
                score(cert.theorem, &cert.v, cert.lambda, &o.last)
            },
        )
        .collect();
    let n = zs.len() as f64;
    let mean = zs.iter().sum::<f64>() / n;
    let var = if zs.len() > 1 {
        zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let std_error = (var / n).sqrt();
    let (limit, side) = audit_limit(problem, cert);
    let slack = 3.0 * std_error + 1e-12 * limit.abs().max(1.0);
    let holds = match side {
        AuditSide::AtMost => mean <= limit + slack,
        AuditSide::AtLeast => mean >= limit - slack,
    };
    Ok(AuditResult {
        theorem: cert.theorem,
        mean,
        std_error,
        limit,
        side,
        n_paths: zs.len(),
        holds,
    })
}

/// Recorded trajectories, in path order.
pub fn record_paths(
    problem: &OccupationProblem,
    config: &SimConfig,
) -> Result<Vec<PathOutcome>, SimError> {
    config.check()?;
    Ok((0..config.record_paths as u64)
        .into_par_iter()
        .map(|id| simulate_path(problem, config.dt, config.seed, id, true))
        .collect())
}

/// Writes `path_id,t,x1..xn,occupied,frozen` rows.
pub fn write_csv<W: io::Write>(paths: &[PathOutcome], dim: usize, out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["path_id".to_string(), "t".to_string()];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    header.extend(["occupied".to_string(), "frozen".to_string()]);
    w.write_record(&header)?;
    for p in paths {
        for s in p.trace.iter().flatten() {
            let mut row = vec![p.path_id.to_string(), format!("{}", s.t())];
            row.extend(s.x.iter().map(|v| format!("{v}")));
            row.push(format!("{}", s.occupied()));
            row.push(s.frozen.to_string());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// SVG of the first state coordinate against time. In one dimension the safe
/// and target sets are shaded.
pub fn render_svg(problem: &OccupationProblem, paths: &[PathOutcome]) -> String {
    const W: f64 = 720.0;
    const HGT: f64 = 420.0;
    const PAD: f64 = 50.0;
    let (lo, hi) = (problem.bounding_box.lower[0], problem.bounding_box.upper[0]);
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let (y0, y1) = (lo - 0.05 * span, hi + 0.05 * span);
    let tx = |t: f64| PAD + (W - 2.0 * PAD) * t / problem.horizon;
    let ty = |y: f64| HGT - PAD - (HGT - 2.0 * PAD) * (y.clamp(y0, y1) - y0) / (y1 - y0);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{HGT}" viewBox="0 0 {W} {HGT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if problem.dimension() == 1 {
        let mut stepper = Stepper::new(problem);
        let bands = |member: &mut dyn FnMut(f64) -> bool| {
            let n = 600;
            let mut out = Vec::new();
            let mut start = None;
            for i in 0..=n {
                let y = y0 + (y1 - y0) * i as f64 / n as f64;
                match (member(y), start) {
                    (true, None) => start = Some(y),
                    (false, Some(s)) => {
                        out.push((s, y));
                        start = None;
                    }
                    _ => {}
                }
            }
            if let Some(s) = start {
                out.push((s, y1));
            }
            out
        };
        let safe = bands(&mut |y| problem.safe.closure_contains(&[y]));
        let target = bands(&mut |y| stepper.in_target(&[y]));
        for (band, fill) in [(safe, "#e6e6e6"), (target, "#c8ecc8")] {
            for (a, b) in band {
                let _ = writeln!(
                    svg,
                    r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
                    tx(0.0),
                    ty(b),
                    tx(problem.horizon) - tx(0.0),
                    ty(a) - ty(b)
                );
            }
        }
    }
    for p in paths {
        let color = if p.success { "#1b9e3a" } else { "#d62728" };
        let pts: Vec<String> = p
            .trace
            .iter()
            .flatten()
            .map(|s| format!("{:.2},{:.2}", tx(s.t()), ty(s.x[0])))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="0.8" points="{}"/>"#,
            pts.join(" ")
        );
    }
    let _ = writeln!(
        svg,
        r#"<line x1="{PAD}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{b}" stroke="black"/>"#,
        b = HGT - PAD,
        r = W - PAD
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">t</text><text x="15" y="{}" font-size="12">x1</text>"#,
        W / 2.0,
        HGT - 15.0,
        HGT / 2.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{PAD}" y="{}" font-size="11">0</text><text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
        HGT - PAD + 15.0,
        W - PAD,
        HGT - PAD + 15.0,
        problem.horizon
    );
    svg.push_str("</svg>\n");
    svg
}

/// Records `config.record_paths` trajectories and writes `<stem>.csv` and
/// `<stem>.svg` into `dir`. With no paths requested nothing is plotted and the
/// CSV holds only its header.
pub fn export_paths(
    problem: &OccupationProblem,
    config: &SimConfig,
    dir: &Path,
    stem: &str,
) -> Result<Vec<PathOutcome>, SimError> {
    let paths = if config.record_paths == 0 {
        Vec::new()
    } else {
        record_paths(problem, config)?
    };
    std::fs::create_dir_all(dir)?;
    let f = std::fs::File::create(dir.join(format!("{stem}.csv")))?;
    write_csv(&paths, problem.dimension(), io::BufWriter::new(f))?;
    if !paths.is_empty() {
        std::fs::write(dir.join(format!("{stem}.svg")), render_svg(problem, &paths))?;
    }
    Ok(paths)
}
