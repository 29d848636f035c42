//! Barrier-certificate programs for the three occupation bounds, the
//! `(lambda, M)` grid search and pointwise certificate replay.
//!
//! Programs are built on the box-normalized problem; the returned barrier is
//! mapped back to the original coordinates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, BoundError};
use crate::model::{boundary_of, complement_within, ModelError, OccupationProblem};
use crate::poly::{Generator, Monomial, PolyError, Polynomial};
use crate::sdp::{SdpBackend, SolveStatus};
use crate::sos::{
    self, assemble, encode_nonneg_on, AffineExpr, AffinePoly, DecisionSpace, Region, Sense,
    SolverReport, SosConstraint, SosError, SosProgram, VarKind,
};

/// Samples per region used by [`replay`].
pub const REPLAY_SAMPLES: usize = 10_000;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sos(#[from] SosError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("barrier degree must be even and positive, got {0}")]
    Degree(u32),
    #[error("empty {0} grid")]
    EmptyGrid(&'static str),
    #[error("grid values must be positive and finite: {0}")]
    GridValue(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    #[serde(rename = "dissipative-upper")]
    DissipativeUpper,
    #[serde(rename = "attractive-I-lower")]
    AttractiveLowerI,
    #[serde(rename = "attractive-II-lower")]
    AttractiveLowerII,
}

impl Theorem {
    pub const ALL: [Theorem; 3] = [
        Theorem::DissipativeUpper,
        Theorem::AttractiveLowerI,
        Theorem::AttractiveLowerII,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::DissipativeUpper => "dissipative-upper",
            Theorem::AttractiveLowerI => "attractive-I-lower",
            Theorem::AttractiveLowerII => "attractive-II-lower",
        }
    }

    pub fn parse(s: &str) -> Option<Theorem> {
        Theorem::ALL.into_iter().find(|t| t.name() == s)
    }

    pub fn is_upper(self) -> bool {
        self == Theorem::DissipativeUpper
    }

    pub fn uses_global_bound(self) -> bool {
        !self.is_upper()
    }
}

impl std::fmt::Display for Theorem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSpec {
    pub theorem: Theorem,
    pub degree: u32,
    pub lambda_grid: Vec<f64>,
    /// Ignored by the upper-bound theorem.
    #[serde(default)]
    pub m_grid: Vec<f64>,
}

impl CertificateSpec {
    pub fn new(theorem: Theorem, degree: u32, lambda_grid: Vec<f64>, m_grid: Vec<f64>) -> Self {
        CertificateSpec {
            theorem,
            degree,
            lambda_grid,
            m_grid,
        }
    }

    pub fn check(&self) -> Result<(), CertifyError> {
        if self.degree == 0 || self.degree % 2 != 0 {
            return Err(CertifyError::Degree(self.degree));
        }
        if self.lambda_grid.is_empty() {
            return Err(CertifyError::EmptyGrid("lambda"));
        }
        if self.theorem.uses_global_bound() && self.m_grid.is_empty() {
            return Err(CertifyError::EmptyGrid("M"));
        }
        for &v in self.lambda_grid.iter().chain(&self.m_grid) {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CertifyError::GridValue(v));
            }
        }
        Ok(())
    }

    /// `(lambda, M)` pairs in grid order; `M` is `None` for the upper bound.
    pub fn points(&self) -> Vec<(f64, Option<f64>)> {
        if self.theorem.uses_global_bound() {
            self.lambda_grid
                .iter()
                .flat_map(|&l| self.m_grid.iter().map(move |&m| (l, Some(m))))
                .collect()
        } else {
            self.lambda_grid.iter().map(|&l| (l, None)).collect()
        }
    }
}

/// A barrier program together with the handles needed to read it back.
#[derive(Debug, Clone)]
pub struct BarrierProgram {
    pub theorem: Theorem,
    pub lambda: f64,
    pub m: Option<f64>,
    pub program: SosProgram,
    basis: Vec<Monomial>,
    beta_var: usize,
}

/// Regions on which the side conditions are imposed.
struct Regions {
    target: Region,
    outside: Region,
    boundary: Vec<Region>,
    closure: Region,
}

fn regions(problem: &OccupationProblem) -> Result<Regions, ModelError> {
    let safe_all = problem.safe.all_inequalities();
    let mut target = problem.target.inequalities().to_vec();
    target.extend(safe_all.iter().cloned());
    let outside = complement_within(&problem.safe, &problem.target)?;
    Ok(Regions {
        target: Region {
            inequalities: target,
            equalities: vec![],
        },
        outside: Region {
            inequalities: outside.all_inequalities(),
            equalities: vec![],
        },
        boundary: boundary_of(&problem.safe)
            .into_iter()
            .map(|p| Region {
                inequalities: p.inequalities,
                equalities: vec![p.equality],
            })
            .collect(),
        closure: Region {
            inequalities: safe_all,
            equalities: vec![],
        },
    })
}

/// Shared decision layout: coefficients of `v` (free) then one sign-constrained
/// scalar for the drift constant.
struct Decisions {
    space: DecisionSpace,
    basis: Vec<Monomial>,
    v: AffinePoly,
    lv: AffinePoly,
    beta_var: usize,
}

fn decisions(problem: &OccupationProblem, degree: u32) -> Result<Decisions, CertifyError> {
    let n = problem.dimension();
    let basis = Monomial::all_up_to(n, degree);
    let gen = Generator::new(&problem.model);
    let mut space = DecisionSpace::new();
    let mut v = AffinePoly::zero(n);
    let mut lv = AffinePoly::zero(n);
    for m in &basis {
        let k = space.add(format!("v{:?}", m.exponents()), VarKind::Free);
        let mono = Polynomial::monomial(m.clone(), 1.0);
        v.add_expr_times(&AffineExpr::var(k), &mono);
        lv.add_expr_times(&AffineExpr::var(k), &gen.apply(&mono)?);
    }
    let beta_var = space.add("beta", VarKind::NonNeg);
    Ok(Decisions {
        space,
        basis,
        v,
        lv,
        beta_var,
    })
}

fn constant(dim: usize, c: f64) -> AffinePoly {
    AffinePoly::from_poly(&Polynomial::constant(dim, c))
}

/// `sum_i terms_i` where each term is `(scale, AffinePoly)`.
fn combo(dim: usize, terms: &[(f64, &AffinePoly)]) -> AffinePoly {
    let mut out = AffinePoly::zero(dim);
    for &(s, p) in terms {
        out.add_scaled(p, s);
    }
    out
}

fn beta_poly(dim: usize, var: usize, sign: f64) -> AffinePoly {
    let mut p = AffinePoly::zero(dim);
    p.add_expr_times(
        &AffineExpr::term(var, sign),
        &Polynomial::constant(dim, 1.0),
    );
    p
}

fn finish(
    theorem: Theorem,
    lambda: f64,
    m: Option<f64>,
    d: Decisions,
    constraints: Vec<SosConstraint>,
    objective: AffineExpr,
    sense: Sense,
) -> Result<BarrierProgram, CertifyError> {
    let program = assemble(&d.space, constraints, objective, sense)?;
    Ok(BarrierProgram {
        theorem,
        lambda,
        m,
        program,
        basis: d.basis,
        beta_var: d.beta_var,
    })
}

fn check_degree(degree: u32) -> Result<(), CertifyError> {
    if degree == 0 || degree % 2 != 0 {
        Err(CertifyError::Degree(degree))
    } else {
        Ok(())
    }
}

/// Upper-bound program. Decision `beta >= 0`; minimizes
/// `v(x0) + beta (e^{lambda H} - 1) / lambda`.
pub fn build_dissipative_program(
    problem: &OccupationProblem,
    lambda: f64,
    degree: u32,
) -> Result<BarrierProgram, CertifyError> {
    check_degree(degree)?;
    let n = problem.dimension();
    let r = regions(problem)?;
    let d = decisions(problem, degree)?;
    let beta = beta_poly(n, d.beta_var, 1.0);
    let mut cs = vec![
        encode_nonneg_on(
            "drift on target",
            combo(n, &[(-1.0, &d.lv), (-lambda, &d.v), (1.0, &beta)]),
            r.target.clone(),
            0,
        ),
        encode_nonneg_on(
            "drift off target",
            combo(n, &[(-1.0, &d.lv), (1.0, &beta)]),
            r.outside,
            0,
        ),
        encode_nonneg_on(
            "target positivity",
            combo(n, &[(1.0, &d.v), (-1.0, &constant(n, 1.0))]),
            r.target,
            0,
        ),
    ];
    for (i, piece) in r.boundary.into_iter().enumerate() {
        cs.push(encode_nonneg_on(
            format!("sink {i}"),
            combo(n, &[(-lambda, &d.v), (1.0, &beta)]),
            piece,
            0,
        ));
    }
    cs.push(encode_nonneg_on("nonnegativity", d.v.clone(), r.closure, 0));
    let mut obj = d.v.eval_affine(problem.model.initial_state());
    obj.add_var(d.beta_var, bounds::growth_integral(lambda, problem.horizon));
    finish(
        Theorem::DissipativeUpper,
        lambda,
        None,
        d,
        cs,
        obj,
        Sense::Minimize,
    )
}

/// First lower-bound program. The drift constant is `beta = -b` with
/// `b >= 0`; maximizes `v(x0) - b H`.
pub fn build_attractive1_program(
    problem: &OccupationProblem,
    lambda: f64,
    m: f64,
    degree: u32,
) -> Result<BarrierProgram, CertifyError> {
    check_degree(degree)?;
    let n = problem.dimension();
    let r = regions(problem)?;
    let d = decisions(problem, degree)?;
    // -beta = b
    let minus_beta = beta_poly(n, d.beta_var, 1.0);
    let mut cs = vec![
        encode_nonneg_on(
            "drift on target",
            combo(n, &[(1.0, &d.lv), (1.0, &minus_beta)]),
            r.target.clone(),
            0,
        ),
        encode_nonneg_on(
            "drift off target",
            combo(n, &[(1.0, &d.lv), (-lambda, &d.v), (1.0, &minus_beta)]),
            r.outside,
            0,
        ),
        encode_nonneg_on(
            "target cap",
            combo(n, &[(1.0, &constant(n, 1.0)), (-1.0, &d.v)]),
            r.target,
            0,
        ),
    ];
    for (i, piece) in r.boundary.into_iter().enumerate() {
        cs.push(encode_nonneg_on(
            format!("sink {i}"),
            combo(n, &[(-lambda, &d.v), (1.0, &minus_beta)]),
            piece,
            0,
        ));
    }
    push_global_bound(&mut cs, n, &d.v, m, r.closure);
    let mut obj = d.v.eval_affine(problem.model.initial_state());
    obj.add_var(d.beta_var, -problem.horizon);
    finish(
        Theorem::AttractiveLowerI,
        lambda,
        Some(m),
        d,
        cs,
        obj,
        Sense::Maximize,
    )
}

/// Second lower-bound program. Decision `beta >= 0`; maximizes
/// `v(x0) + beta (1 - e^{-lambda K}) / lambda`.
pub fn build_attractive2_program(
    problem: &OccupationProblem,
    lambda: f64,
    m: f64,
    degree: u32,
) -> Result<BarrierProgram, CertifyError> {
    check_degree(degree)?;
    let n = problem.dimension();
    let r = regions(problem)?;
    let d = decisions(problem, degree)?;
    let beta = beta_poly(n, d.beta_var, 1.0);
    let mut cs = vec![
        encode_nonneg_on(
            "drift on target",
            combo(n, &[(1.0, &d.lv), (lambda, &d.v), (-1.0, &beta)]),
            r.target.clone(),
            0,
        ),
        encode_nonneg_on(
            "drift off target",
            combo(n, &[(1.0, &d.lv), (-lambda, &d.v), (-1.0, &beta)]),
            r.outside,
            0,
        ),
        encode_nonneg_on(
            "target cap",
            combo(n, &[(1.0, &constant(n, 1.0)), (-1.0, &d.v)]),
            r.target,
            0,
        ),
    ];
    for (i, piece) in r.boundary.into_iter().enumerate() {
        cs.push(encode_nonneg_on(
            format!("sink {i}"),
            combo(n, &[(-lambda, &d.v), (-1.0, &beta)]),
            piece,
            0,
        ));
    }
    push_global_bound(&mut cs, n, &d.v, m, r.closure);
    let mut obj = d.v.eval_affine(problem.model.initial_state());
    obj.add_var(
        d.beta_var,
        bounds::drift_gain(1.0, lambda, problem.threshold),
    );
    finish(
        Theorem::AttractiveLowerII,
        lambda,
        Some(m),
        d,
        cs,
        obj,
        Sense::Maximize,
    )
}

fn push_global_bound(
    cs: &mut Vec<SosConstraint>,
    n: usize,
    v: &AffinePoly,
    m: f64,
    closure: Region,
) {
    let mm = constant(n, m);
    cs.push(encode_nonneg_on(
        "upper global bound",
        combo(n, &[(1.0, &mm), (-1.0, v)]),
        closure.clone(),
        0,
    ));
    cs.push(encode_nonneg_on(
        "lower global bound",
        combo(n, &[(1.0, &mm), (1.0, v)]),
        closure,
        0,
    ));
}

pub fn build_program(
    problem: &OccupationProblem,
    theorem: Theorem,
    lambda: f64,
    m: Option<f64>,
    degree: u32,
) -> Result<BarrierProgram, CertifyError> {
    let m = m.unwrap_or(1.0);
    match theorem {
        Theorem::DissipativeUpper => build_dissipative_program(problem, lambda, degree),
        Theorem::AttractiveLowerI => build_attractive1_program(problem, lambda, m, degree),
        Theorem::AttractiveLowerII => build_attractive2_program(problem, lambda, m, degree),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub theorem: Theorem,
    pub degree: u32,
    /// Barrier in the problem's original coordinates.
    pub v: Polynomial,
    pub lambda: f64,
    /// Signed drift constant as it appears in the theorem.
    pub beta: f64,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub v0: f64,
    pub bound: f64,
    pub raw_bound: f64,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub solver: SolverReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Certified,
    Infeasible,
    /// Precondition on `(lambda, M)` fails; no program is solved.
    Rejected,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub lambda: f64,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub status: PointStatus,
    pub bound: Option<f64>,
    pub raw_bound: Option<f64>,
    pub message: String,
    pub solver: Option<SolverReport>,
    #[serde(skip)]
    pub certificate: Option<Certificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub spec: CertificateSpec,
    pub points: Vec<GridPoint>,
    pub best: Option<Certificate>,
}

/// Closed-form bound for the given theorem. `beta` is the signed drift constant.
pub fn theorem_bound(
    theorem: Theorem,
    problem: &OccupationProblem,
    v0: f64,
    lambda: f64,
    beta: f64,
    m: Option<f64>,
) -> Result<(f64, Option<f64>, Option<f64>), BoundError> {
    let (h, k) = (problem.horizon, problem.threshold);
    let m = m.unwrap_or(1.0);
    match theorem {
        Theorem::DissipativeUpper => Ok((bounds::bound_upper(v0, lambda, beta, h, k)?, None, None)),
        Theorem::AttractiveLowerI => Ok((
            bounds::bound_lower1(v0, beta, m, lambda, h, k)?,
            Some(bounds::delta_exterior(m, lambda, h, k)),
            None,
        )),
        Theorem::AttractiveLowerII => Ok((
            bounds::bound_lower2(v0, beta, m, lambda, h, k)?,
            Some(bounds::delta_clock(m, lambda, h, k)),
            Some(bounds::drift_gain(beta, lambda, k)),
        )),
    }
}

/// Precondition of the lower-bound formulas on `(lambda, M)`.
pub fn admissible(
    theorem: Theorem,
    problem: &OccupationProblem,
    lambda: f64,
    m: Option<f64>,
) -> bool {
    let m = m.unwrap_or(1.0);
    let (h, k) = (problem.horizon, problem.threshold);
    match theorem {
        Theorem::DissipativeUpper => true,
        Theorem::AttractiveLowerI => bounds::bound_lower1(0.0, 0.0, m, lambda, h, k).is_ok(),
        Theorem::AttractiveLowerII => bounds::bound_lower2(0.0, 0.0, m, lambda, h, k).is_ok(),
    }
}

/// Builds and solves one grid point.
pub fn certify_point(
    problem: &OccupationProblem,
    theorem: Theorem,
    lambda: f64,
    m: Option<f64>,
    degree: u32,
    backend: &dyn SdpBackend,
) -> Result<GridPoint, CertifyError> {
    let m = if theorem.uses_global_bound() {
        m.or(Some(1.0))
    } else {
        None
    };
    if !admissible(theorem, problem, lambda, m) {
        return Ok(GridPoint {
            lambda,
            m,
            status: PointStatus::Rejected,
            bound: None,
            raw_bound: None,
            message: "horizon penalty precondition fails".into(),
            solver: None,
            certificate: None,
        });
    }
    let (normalized, scaling) = problem.normalized();
    let bp = build_program(&normalized, theorem, lambda, m, degree)?;
    let (report, sol) = sos::solve(&bp.program, backend, &normalized.bounding_box)?;
    let status = match report.status {
        SolveStatus::Optimal => PointStatus::Certified,
        SolveStatus::Infeasible => PointStatus::Infeasible,
        SolveStatus::NumericalFailure => PointStatus::NumericalFailure,
    };
    let mut point = GridPoint {
        lambda,
        m,
        status,
        bound: None,
        raw_bound: None,
        message: report.message.clone(),
        solver: Some(report.clone()),
        certificate: None,
    };
    let (Some(sol), PointStatus::Certified) = (sol, status) else {
        return Ok(point);
    };
    let v_unit = bp.barrier(&sol.decisions);
    let beta_raw = sol.decisions[bp.beta_var].max(0.0);
    let beta = if theorem == Theorem::AttractiveLowerI {
        -beta_raw
    } else {
        beta_raw
    };
    let v0 = v_unit.eval(normalized.model.initial_state());
    match theorem_bound(theorem, problem, v0, lambda, beta, m) {
        Ok((raw, delta, gamma)) => {
            let bound = bounds::clamp_probability(raw);
            point.bound = Some(bound);
            point.raw_bound = Some(raw);
            point.certificate = Some(Certificate {
                theorem,
                degree,
                v: scaling.push_forward(&v_unit),
                lambda,
                beta,
                m,
                v0,
                bound,
                raw_bound: raw,
                delta,
                gamma,
                solver: report,
            });
        }
        Err(e) => {
            point.status = PointStatus::Rejected;
            point.message = e.to_string();
        }
    }
    Ok(point)
}

impl BarrierProgram {
    /// The barrier `v` for decision values `x`.
    pub fn barrier(&self, x: &[f64]) -> Polynomial {
        let dim = self
            .program
            .constraints
            .first()
            .map_or(0, |c| c.residual.dim());
        let mut v = Polynomial::zero(dim);
        for (k, m) in self.basis.iter().enumerate() {
            v.add_term(m.clone(), x[k]);
        }
        v
    }

    pub fn beta_index(&self) -> usize {
        self.beta_var
    }
}

/// Solves every grid point (in parallel) and picks the best certificate.
///
/// Lower bounds keep the largest bound and the upper bound keeps the smallest;
/// ties go to the smaller `lambda`, then the smaller `M`.
pub fn grid_search(
    problem: &OccupationProblem,
    spec: &CertificateSpec,
    backend: &dyn SdpBackend,
) -> Result<GridReport, CertifyError> {
    spec.check()?;
    let points: Vec<GridPoint> = spec
        .points()
        .into_par_iter()
        .map(|(l, m)| certify_point(problem, spec.theorem, l, m, spec.degree, backend))
        .collect::<Result<_, _>>()?;
    let best = pick_best(spec.theorem, &points);
    Ok(GridReport {
        spec: spec.clone(),
        points,
        best,
    })
}

fn pick_best(theorem: Theorem, points: &[GridPoint]) -> Option<Certificate> {
    let mut best: Option<&Certificate> = None;
    for c in points.iter().filter_map(|p| p.certificate.as_ref()) {
        let better = match best {
            None => true,
            Some(b) => {
                let (x, y) = if theorem.is_upper() {
                    (b.bound, c.bound)
                } else {
                    (c.bound, b.bound)
                };
                if x != y {
                    x > y
                } else if c.lambda != b.lambda {
                    c.lambda < b.lambda
                } else {
                    c.m.unwrap_or(0.0) < b.m.unwrap_or(0.0)
                }
            }
        };
        if better {
            best = Some(c);
        }
    }
    best.cloned()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayCheck {
    pub condition: String,
    pub samples: usize,
    /// Largest amount by which the condition fails; non-positive when it holds.
    pub worst_violation: f64,
}

/// Re-evaluates each side condition of the certificate at sampled points of
/// its region, in the original coordinates.
pub fn replay(
    problem: &OccupationProblem,
    cert: &Certificate,
    n: usize,
) -> Result<Vec<ReplayCheck>, CertifyError> {
    let r = regions(problem)?;
    let v = &cert.v;
    let lv = Generator::new(&problem.model).apply(v)?;
    let (lambda, beta) = (cert.lambda, cert.beta);
    let m = cert.m.unwrap_or(1.0);
    let one = Polynomial::constant(problem.dimension(), 1.0);
    let c = |s: f64| one.scale(s);
    let mut conds: Vec<(String, Polynomial, Region)> = Vec::new();
    match cert.theorem {
        Theorem::DissipativeUpper => {
            conds.push((
                "drift on target".into(),
                &(&(-&lv) - &v.scale(lambda)) + &c(beta),
                r.target.clone(),
            ));
            conds.push((
                "drift off target".into(),
                &(-&lv) + &c(beta),
                r.outside.clone(),
            ));
            conds.push(("target positivity".into(), v - &one, r.target.clone()));
            for (i, p) in r.boundary.iter().enumerate() {
                conds.push((format!("sink {i}"), &v.scale(-lambda) + &c(beta), p.clone()));
            }
            conds.push(("nonnegativity".into(), v.clone(), r.closure.clone()));
        }
        Theorem::AttractiveLowerI | Theorem::AttractiveLowerII => {
            let on_target = if cert.theorem == Theorem::AttractiveLowerI {
                &lv - &c(beta)
            } else {
                &(&lv + &v.scale(lambda)) - &c(beta)
            };
            conds.push(("drift on target".into(), on_target, r.target.clone()));
            conds.push((
                "drift off target".into(),
                &(&lv - &v.scale(lambda)) - &c(beta),
                r.outside.clone(),
            ));
            conds.push(("target cap".into(), &one - v, r.target.clone()));
            for (i, p) in r.boundary.iter().enumerate() {
                conds.push((format!("sink {i}"), &v.scale(-lambda) - &c(beta), p.clone()));
            }
            conds.push(("upper global bound".into(), &c(m) - v, r.closure.clone()));
            conds.push(("lower global bound".into(), &c(m) + v, r.closure.clone()));
        }
    }
    Ok(conds
        .into_iter()
        .map(|(name, p, region)| {
            let pts = sos::region_samples(&region, &problem.bounding_box, n);
            let worst = pts
                .iter()
                .map(|x| -p.eval(x))
                .fold(f64::NEG_INFINITY, f64::max);
            ReplayCheck {
                condition: name,
                samples: pts.len(),
                worst_violation: worst,
            }
        })
        .collect())
}
