//! Sum-of-squares constraints and their compilation into block SDPs.
//!
//! A constraint "`r >= 0` on `{g_i >= 0, e_j = 0}`" with `r` affine in the
//! decision variables is encoded as the polynomial identity
//!
//! ```text
//! r(x) = s_0(x) + sum_i s_i(x) g_i(x) + sum_j t_j(x) e_j(x)
//! ```
//!
//! with every `s` a Gram-form SOS polynomial and every `t` a free polynomial.
//! Gram bases and the coefficient matching use tensor Chebyshev polynomials,
//! which span the same spaces as monomials of the same degrees but keep the
//! SDP well conditioned on the unit box.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chebyshev;
use crate::model::BoundingBox;
use crate::poly::{Monomial, PolyError, Polynomial};
use crate::sample;
use crate::sdp::{BlockEntry, EqualityRow, SdpBackend, SdpError, SdpProblem, SolveStatus};

/// Samples per region used by [`postcheck`].
pub const POSTCHECK_SAMPLES: usize = 10_000;
/// Largest sampled violation an accepted certificate may show.
pub const POSTCHECK_TOLERANCE: f64 = 1e-6;
/// Smallest Gram eigenvalue tolerated on an optimal report.
pub const GRAM_EIGEN_TOLERANCE: f64 = -1e-7;

#[derive(Debug, Error)]
pub enum SosError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error("decision variable {index} outside a space of {size}")]
    UnknownDecision { index: usize, size: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarKind {
    Free,
    NonNeg,
}

/// Scalar decision variables shared by all constraints of one program.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecisionSpace {
    kinds: Vec<VarKind>,
    names: Vec<String>,
}

impl DecisionSpace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, kind: VarKind) -> usize {
        self.kinds.push(kind);
        self.names.push(name.into());
        self.kinds.len() - 1
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn kind(&self, i: usize) -> VarKind {
        self.kinds[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }
}

/// `constant + sum_k coeffs[k] * d_k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineExpr {
    pub constant: f64,
    pub coeffs: BTreeMap<usize, f64>,
}

impl AffineExpr {
    pub fn constant(c: f64) -> Self {
        AffineExpr {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn var(k: usize) -> Self {
        Self::term(k, 1.0)
    }

    pub fn term(k: usize, c: f64) -> Self {
        let mut e = Self::constant(0.0);
        e.add_var(k, c);
        e
    }

    pub fn add_var(&mut self, k: usize, c: f64) {
        if c == 0.0 {
            return;
        }
        let s = self.coeffs.entry(k).or_insert(0.0);
        *s += c;
        if *s == 0.0 {
            self.coeffs.remove(&k);
        }
    }

    pub fn add_scaled(&mut self, other: &AffineExpr, s: f64) {
        self.constant += s * other.constant;
        for (&k, &c) in &other.coeffs {
            self.add_var(k, s * c);
        }
    }

    pub fn scaled(&self, s: f64) -> AffineExpr {
        let mut out = AffineExpr::constant(0.0);
        out.add_scaled(self, s);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.coeffs.is_empty()
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant
            + self
                .coeffs
                .iter()
                .map(|(&k, &c)| c * values[k])
                .sum::<f64>()
    }

    pub fn max_var(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }
}

/// Polynomial whose coefficients are affine expressions in the decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePoly {
    dim: usize,
    terms: BTreeMap<Monomial, AffineExpr>,
}

impl AffinePoly {
    pub fn zero(dim: usize) -> Self {
        AffinePoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_poly(p: &Polynomial) -> Self {
        let mut out = Self::zero(p.dim());
        out.add_poly(p, 1.0);
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `s * p` to the constant part.
    pub fn add_poly(&mut self, p: &Polynomial, s: f64) {
        for (m, c) in p.terms() {
            self.terms.entry(m.clone()).or_default().constant += s * c;
        }
        self.prune();
    }

    /// Adds `expr * p`.
    pub fn add_expr_times(&mut self, expr: &AffineExpr, p: &Polynomial) {
        for (m, c) in p.terms() {
            self.terms.entry(m.clone()).or_default().add_scaled(expr, c);
        }
        self.prune();
    }

    pub fn add_scaled(&mut self, other: &AffinePoly, s: f64) {
        for (m, e) in &other.terms {
            self.terms.entry(m.clone()).or_default().add_scaled(e, s);
        }
        self.prune();
    }

    pub fn scaled(&self, s: f64) -> AffinePoly {
        let mut out = AffinePoly::zero(self.dim);
        out.add_scaled(self, s);
        out
    }

    fn prune(&mut self) {
        self.terms.retain(|_, e| !e.is_zero());
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &AffineExpr)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn instantiate(&self, values: &[f64]) -> Polynomial {
        let mut p = Polynomial::zero(self.dim);
        for (m, e) in &self.terms {
            p.add_term(m.clone(), e.eval(values));
        }
        p
    }

    /// Affine expression of the value at `point`.
    pub fn eval_affine(&self, point: &[f64]) -> AffineExpr {
        let mut out = AffineExpr::constant(0.0);
        for (m, e) in &self.terms {
            out.add_scaled(e, m.eval(point));
        }
        out
    }

    pub fn max_var(&self) -> Option<usize> {
        self.terms.values().filter_map(AffineExpr::max_var).max()
    }
}

/// Closed region `{g_i >= 0, e_j = 0}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Region {
    pub inequalities: Vec<Polynomial>,
    pub equalities: Vec<Polynomial>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SosMultiplier {
    /// `None` for the plain SOS term `s_0`.
    pub generator: Option<Polynomial>,
    /// Tensor Chebyshev multi-indices of the Gram basis.
    pub basis: Vec<Monomial>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeMultiplier {
    pub generator: Polynomial,
    /// Tensor Chebyshev multi-indices spanning the multiplier.
    pub basis: Vec<Monomial>,
}

/// "`residual >= 0` on `region`", with its multiplier structure fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SosConstraint {
    pub label: String,
    pub residual: AffinePoly,
    pub region: Region,
    /// Degree budget for every product in the representation.
    pub multiplier_degree: u32,
    pub sos: Vec<SosMultiplier>,
    pub free: Vec<FreeMultiplier>,
}

fn round_up_even(d: u32) -> u32 {
    d + (d % 2)
}

/// Fixes the multiplier structure for `residual >= 0` on `region`.
///
/// The degree budget is `max(multiplier_degree, deg r rounded up to even)`.
/// Each SOS multiplier of `g_i` gets the largest even degree with
/// `deg(s_i g_i) <= budget`, and each free multiplier of `e_j` has degree
/// `budget - deg e_j`.
pub fn encode_nonneg_on(
    label: impl Into<String>,
    residual: AffinePoly,
    region: Region,
    multiplier_degree: u32,
) -> SosConstraint {
    let dim = residual.dim();
    let budget = round_up_even(residual.degree()).max(round_up_even(multiplier_degree));
    // On a variety, Gram bases only need standard monomials: anything divisible
    // by a leading monomial of an equality is absorbed by the free multipliers,
    // and keeping it would force singular moment matrices.
    let leading: Vec<Monomial> = region
        .equalities
        .iter()
        .filter_map(|e| e.terms().map(|(m, _)| m.clone()).max())
        .collect();
    let basis = |half: u32| -> Vec<Monomial> {
        Monomial::all_up_to(dim, half)
            .into_iter()
            .filter(|m| !leading.iter().any(|l| divides(l, m)))
            .collect()
    };
    let mut sos = vec![SosMultiplier {
        generator: None,
        basis: basis(budget / 2),
    }];
    for g in &region.inequalities {
        let dg = g.degree();
        if dg > budget {
            continue;
        }
        let ds = (budget - dg) / 2 * 2;
        sos.push(SosMultiplier {
            generator: Some(g.clone()),
            basis: basis(ds / 2),
        });
    }
    let free = region
        .equalities
        .iter()
        .filter(|e| e.degree() <= budget)
        .map(|e| FreeMultiplier {
            generator: e.clone(),
            basis: Monomial::all_up_to(dim, budget - e.degree()),
        })
        .collect();
    SosConstraint {
        label: label.into(),
        residual,
        region,
        multiplier_degree: budget,
        sos,
        free,
    }
}

fn divides(a: &Monomial, b: &Monomial) -> bool {
    a.exponents().iter().zip(b.exponents()).all(|(x, y)| x <= y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Where a decision variable lives in the SDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Free(usize),
    Scalar(usize),
}

#[derive(Debug, Clone, PartialEq)]
struct ConstraintLayout {
    /// SDP block per SOS multiplier
    blocks: Vec<usize>,
    /// first free index per free multiplier
    free_offsets: Vec<usize>,
}

/// Assembled program: the SDP and the bookkeeping needed to read decisions and
/// multipliers back out of a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SosProgram {
    pub space: DecisionSpace,
    pub constraints: Vec<SosConstraint>,
    pub objective: AffineExpr,
    pub sense: Sense,
    pub sdp: SdpProblem,
    slots: Vec<Slot>,
    layouts: Vec<ConstraintLayout>,
}

/// Compiles constraints into one SDP. Rows are emitted constraint by
/// constraint in graded-lex monomial order, so identical inputs give
/// identical programs.
pub fn assemble(
    space: &DecisionSpace,
    constraints: Vec<SosConstraint>,
    objective: AffineExpr,
    sense: Sense,
) -> Result<SosProgram, SosError> {
    let check = |k: Option<usize>| match k {
        Some(k) if k >= space.len() => Err(SosError::UnknownDecision {
            index: k,
            size: space.len(),
        }),
        _ => Ok(()),
    };
    check(objective.max_var())?;
    for c in &constraints {
        check(c.residual.max_var())?;
    }

    let mut sdp = SdpProblem::default();
    let mut slots = Vec::with_capacity(space.len());
    for k in 0..space.len() {
        match space.kind(k) {
            VarKind::Free => {
                slots.push(Slot::Free(sdp.n_free));
                sdp.n_free += 1;
            }
            VarKind::NonNeg => {
                slots.push(Slot::Scalar(sdp.blocks.len()));
                sdp.blocks.push(1);
            }
        }
    }

    let mut layouts = Vec::with_capacity(constraints.len());
    for c in &constraints {
        let blocks: Vec<usize> = c
            .sos
            .iter()
            .map(|s| {
                sdp.blocks.push(s.basis.len());
                sdp.blocks.len() - 1
            })
            .collect();
        let free_offsets: Vec<usize> = c
            .free
            .iter()
            .map(|f| {
                let off = sdp.n_free;
                sdp.n_free += f.basis.len();
                off
            })
            .collect();

        // Chebyshev index -> row under construction
        let mut rows: BTreeMap<Monomial, EqualityRow> = BTreeMap::new();
        for (m, e) in c.residual.terms() {
            for (idx, w) in chebyshev::monomial_to_chebyshev(m) {
                let row = rows.entry(idx).or_default();
                row.rhs -= w * e.constant;
                for (&k, &v) in &e.coeffs {
                    push_decision(row, slots[k], w * v);
                }
            }
        }
        for (s, &blk) in c.sos.iter().zip(&blocks) {
            let gen = s
                .generator
                .clone()
                .unwrap_or_else(|| Polynomial::constant(c.residual.dim(), 1.0));
            let gen = chebyshev::to_chebyshev(&gen);
            let mut acc: BTreeMap<(Monomial, usize, usize), f64> = BTreeMap::new();
            for p in 0..s.basis.len() {
                for q in p..s.basis.len() {
                    for (zz, zw) in chebyshev::product(&s.basis[p], &s.basis[q]) {
                        for (gm, gc) in &gen {
                            for (idx, w) in chebyshev::product(&zz, gm) {
                                *acc.entry((idx, p, q)).or_insert(0.0) += zw * gc * w;
                            }
                        }
                    }
                }
            }
            for ((m, p, q), v) in acc {
                if v != 0.0 {
                    rows.entry(m).or_default().entries.push(BlockEntry {
                        block: blk,
                        i: p,
                        j: q,
                        value: -v,
                    });
                }
            }
        }
        for (f, &off) in c.free.iter().zip(&free_offsets) {
            let gen = chebyshev::to_chebyshev(&f.generator);
            for (k, tm) in f.basis.iter().enumerate() {
                for (gm, gc) in &gen {
                    for (idx, w) in chebyshev::product(tm, gm) {
                        rows.entry(idx).or_default().free.push((off + k, -gc * w));
                    }
                }
            }
        }
        for (_, mut row) in rows {
            row.free.sort_by_key(|&(k, _)| k);
            merge_free(&mut row.free);
            if row.free.is_empty() && row.entries.is_empty() {
                if row.rhs != 0.0 {
                    // 0 = rhs: keep as an (unsatisfiable) row so the solver
                    // reports infeasibility
                    sdp.rows.push(row);
                }
                continue;
            }
            sdp.rows.push(row);
        }
        layouts.push(ConstraintLayout {
            blocks,
            free_offsets,
        });
    }

    let sign = match sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    sdp.objective_offset = sign * objective.constant;
    for (&k, &v) in &objective.coeffs {
        match slots[k] {
            Slot::Free(i) => sdp.objective_free.push((i, sign * v)),
            Slot::Scalar(b) => sdp.objective_blocks.push(BlockEntry {
                block: b,
                i: 0,
                j: 0,
                value: sign * v,
            }),
        }
    }

    Ok(SosProgram {
        space: space.clone(),
        constraints,
        objective,
        sense,
        sdp,
        slots,
        layouts,
    })
}

fn push_decision(row: &mut EqualityRow, slot: Slot, v: f64) {
    match slot {
        Slot::Free(i) => row.free.push((i, v)),
        Slot::Scalar(b) => row.entries.push(BlockEntry {
            block: b,
            i: 0,
            j: 0,
            value: v,
        }),
    }
}

fn merge_free(free: &mut Vec<(usize, f64)>) {
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(free.len());
    for &(k, v) in free.iter() {
        match out.last_mut() {
            Some((lk, lv)) if *lk == k => *lv += v,
            _ => out.push((k, v)),
        }
    }
    out.retain(|&(_, v)| v != 0.0);
    *free = out;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub status: SolveStatus,
    pub objective_value: f64,
    pub psd_min_eigenvalues: Vec<f64>,
    pub residual_sample_max_violation: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    pub backend: String,
    pub message: String,
}

/// Decision values and multipliers of a solved program.
#[derive(Debug, Clone, PartialEq)]
pub struct SosSolution {
    pub decisions: Vec<f64>,
    /// per constraint, per SOS multiplier
    pub grams: Vec<Vec<DMatrix<f64>>>,
    /// per constraint, per free multiplier
    pub free_multipliers: Vec<Vec<Polynomial>>,
}

impl SosProgram {
    fn extract(&self, sol: &crate::sdp::SdpSolution) -> SosSolution {
        let decisions = self
            .slots
            .iter()
            .map(|s| match *s {
                Slot::Free(i) => sol.free[i],
                Slot::Scalar(b) => sol.blocks[b][(0, 0)],
            })
            .collect();
        let grams = self
            .layouts
            .iter()
            .map(|l| l.blocks.iter().map(|&b| sol.blocks[b].clone()).collect())
            .collect();
        let free_multipliers = self
            .constraints
            .iter()
            .zip(&self.layouts)
            .map(|(c, l)| {
                c.free
                    .iter()
                    .zip(&l.free_offsets)
                    .map(|(f, &off)| {
                        let coeffs = f
                            .basis
                            .iter()
                            .enumerate()
                            .map(|(i, m)| (m.clone(), sol.free[off + i]))
                            .collect();
                        chebyshev::from_chebyshev(c.residual.dim(), &coeffs)
                    })
                    .collect()
            })
            .collect();
        SosSolution {
            decisions,
            grams,
            free_multipliers,
        }
    }
}

/// Solves the program; on an optimal status the sampled post-check runs
/// automatically and an over-tolerance result downgrades the status to
/// numerical failure.
pub fn solve(
    program: &SosProgram,
    backend: &dyn SdpBackend,
    bbox: &BoundingBox,
) -> Result<(SolverReport, Option<SosSolution>), SosError> {
    let out = backend.solve(&program.sdp)?;
    let sign = match program.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut report = SolverReport {
        status: out.status,
        objective_value: sign * out.objective,
        psd_min_eigenvalues: Vec::new(),
        residual_sample_max_violation: f64::NAN,
        primal_infeasibility: out.primal_infeasibility,
        dual_infeasibility: out.dual_infeasibility,
        relative_gap: out.relative_gap,
        iterations: out.iterations,
        backend: backend.name().to_string(),
        message: out.message.clone(),
    };
    if out.status != SolveStatus::Optimal {
        return Ok((report, None));
    }
    let Some(raw) = out.solution.as_ref() else {
        report.status = SolveStatus::NumericalFailure;
        return Ok((report, None));
    };
    report.psd_min_eigenvalues = raw.min_eigenvalues();
    let sol = program.extract(raw);
    report.objective_value = program.objective.eval(&sol.decisions);
    let violation = postcheck(program, &sol, bbox, POSTCHECK_SAMPLES);
    report.residual_sample_max_violation = violation;
    let eig_ok = report
        .psd_min_eigenvalues
        .iter()
        .all(|&e| e >= GRAM_EIGEN_TOLERANCE);
    if !(violation <= POSTCHECK_TOLERANCE) || !eig_ok {
        report.status = SolveStatus::NumericalFailure;
        report.message = format!(
            "{}; post-check violation {violation:.3e}, min Gram eigenvalue {:.3e}",
            report.message,
            report
                .psd_min_eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        );
    }
    Ok((report, Some(sol)))
}

fn gram_value(basis: &[Monomial], q: &DMatrix<f64>, x: &[f64]) -> f64 {
    let z = DVector::from_iterator(basis.len(), basis.iter().map(|m| chebyshev::eval(m, x)));
    z.dot(&(q * &z))
}

/// Sample points of a constraint region inside `bbox`.
pub fn region_samples(region: &Region, bbox: &BoundingBox, n: usize) -> Vec<Vec<f64>> {
    match region.equalities.split_first() {
        None => sample::region_points_refined(&region.inequalities, bbox, n),
        Some((first, rest)) => {
            let piece = crate::model::BoundaryPiece {
                equality: first.clone(),
                inequalities: region.inequalities.clone(),
            };
            sample::boundary_points(&piece, bbox, n)
                .into_iter()
                .filter(|p| rest.iter().all(|e| e.eval(p).abs() <= 1e-9))
                .collect()
        }
    }
}

/// Worst sampled violation over all constraints of the program.
///
/// At every sampled region point this takes the largest of: `-r(x)`, the
/// mismatch `|r(x) - representation(x)|`, and `-s_i(x)` for each Gram
/// multiplier. Zero or less means every checked inequality holds.
pub fn postcheck(program: &SosProgram, sol: &SosSolution, bbox: &BoundingBox, n: usize) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (ci, c) in program.constraints.iter().enumerate() {
        let r = c.residual.instantiate(&sol.decisions);
        let pts = region_samples(&c.region, bbox, n);
        for x in &pts {
            let rv = r.eval(x);
            let mut rep = 0.0;
            for (s, q) in c.sos.iter().zip(&sol.grams[ci]) {
                let sv = gram_value(&s.basis, q, x);
                worst = worst.max(-sv);
                rep += sv * s.generator.as_ref().map_or(1.0, |g| g.eval(x));
            }
            for (f, t) in c.free.iter().zip(&sol.free_multipliers[ci]) {
                rep += t.eval(x) * f.generator.eval(x);
            }
            worst = worst.max(-rv).max((rv - rep).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::InteriorPoint;

    fn x() -> Polynomial {
        Polynomial::var(1, 0)
    }

    fn one_minus_x2() -> Polynomial {
        Polynomial::univariate(&[1.0, 0.0, -1.0])
    }

    fn unit() -> BoundingBox {
        BoundingBox::unit(1)
    }

    #[test]
    fn generator_itself_is_certified() {
        let space = DecisionSpace::new();
        let c = encode_nonneg_on(
            "1-x^2 on [-1,1]",
            AffinePoly::from_poly(&one_minus_x2()),
            Region {
                inequalities: vec![one_minus_x2()],
                equalities: vec![],
            },
            0,
        );
        let prog = assemble(&space, vec![c], AffineExpr::constant(0.0), Sense::Minimize).unwrap();
        let (rep, sol) = solve(&prog, &InteriorPoint::default(), &unit()).unwrap();
        assert_eq!(rep.status, SolveStatus::Optimal, "{}", rep.message);
        assert!(rep.residual_sample_max_violation <= 1e-7);
        assert!(sol.is_some());
    }

    #[test]
    fn odd_function_on_two_point_variety() {
        // x >= 0 on {1 - x^2 = 0} is false at x = -1
        let space = DecisionSpace::new();
        let region = Region {
            inequalities: vec![],
            equalities: vec![one_minus_x2()],
        };
        let c = encode_nonneg_on("x", AffinePoly::from_poly(&x()), region.clone(), 2);
        let prog = assemble(&space, vec![c], AffineExpr::constant(0.0), Sense::Minimize).unwrap();
        let (rep, _) = solve(&prog, &InteriorPoint::default(), &unit()).unwrap();
        assert_ne!(rep.status, SolveStatus::Optimal);

        // x + 1 >= 0 on the same variety holds: x + 1 = (x+1)^2/2 + (1 - x^2)/2
        let c = encode_nonneg_on(
            "x+1",
            AffinePoly::from_poly(&Polynomial::univariate(&[1.0, 1.0])),
            region,
            2,
        );
        let prog = assemble(&space, vec![c], AffineExpr::constant(0.0), Sense::Minimize).unwrap();
        let (rep, sol) = solve(&prog, &InteriorPoint::default(), &unit()).unwrap();
        assert_eq!(rep.status, SolveStatus::Optimal, "{}", rep.message);
        assert!(rep.residual_sample_max_violation <= 1e-6);
        let sol = sol.unwrap();
        for p in [-1.0, 1.0] {
            let s0 = gram_value(&prog.constraints[0].sos[0].basis, &sol.grams[0][0], &[p]);
            assert!((s0 - (1.0 + p)).abs() < 1e-6);
        }
    }

    #[test]
    fn negative_constant_is_infeasible() {
        let space = DecisionSpace::new();
        let c = encode_nonneg_on(
            "-1",
            AffinePoly::from_poly(&Polynomial::constant(1, -1.0)),
            Region {
                inequalities: vec![one_minus_x2()],
                equalities: vec![],
            },
            4,
        );
        let prog = assemble(&space, vec![c], AffineExpr::constant(0.0), Sense::Minimize).unwrap();
        let (rep, sol) = solve(&prog, &InteriorPoint::default(), &unit()).unwrap();
        assert_eq!(rep.status, SolveStatus::Infeasible);
        assert!(sol.is_none());
    }

    #[test]
    fn empty_program_is_trivially_optimal() {
        let prog = assemble(
            &DecisionSpace::new(),
            vec![],
            AffineExpr::constant(0.0),
            Sense::Minimize,
        )
        .unwrap();
        let (rep, _) = solve(&prog, &InteriorPoint::default(), &unit()).unwrap();
        assert_eq!(rep.status, SolveStatus::Optimal);
        assert_eq!(rep.objective_value, 0.0);
    }

    /// `v - 1 >= 0` on the target with a free quadratic `v`; minimizing
    /// `v(0)` should land on `v(0) = 1`.
    fn constant_certificate_program(extra_degree: u32) -> SosProgram {
        let mut space = DecisionSpace::new();
        let basis = Monomial::all_up_to(1, 2);
        let mut v = AffinePoly::zero(1);
        for m in &basis {
            let k = space.add(format!("v{:?}", m.exponents()), VarKind::Free);
            v.add_expr_times(&AffineExpr::var(k), &Polynomial::monomial(m.clone(), 1.0));
        }
        let target = Polynomial::univariate(&[0.01, 0.0, -1.0]);
        let mut r = v.clone();
        r.add_poly(&Polynomial::constant(1, 1.0), -1.0);
        let c1 = encode_nonneg_on(
            "v - 1 on T",
            r,
            Region {
                inequalities: vec![target, one_minus_x2()],
                equalities: vec![],
            },
            extra_degree,
        );
        let c2 = encode_nonneg_on(
            "v on X",
            v.clone(),
            Region {
                inequalities: vec![one_minus_x2()],
                equalities: vec![],
            },
            extra_degree,
        );
        let obj = v.eval_affine(&[0.0]);
        assemble(&space, vec![c1, c2], obj, Sense::Minimize).unwrap()
    }

    #[test]
    fn constant_barrier_is_feasible_and_monotone_in_degree() {
        for extra in [0, 4] {
            let prog = constant_certificate_program(extra);
            let (rep, sol) = solve(&prog, &InteriorPoint::default(), &unit()).unwrap();
            assert_eq!(rep.status, SolveStatus::Optimal, "{}", rep.message);
            assert!(
                (rep.objective_value - 1.0).abs() < 1e-6,
                "{}",
                rep.objective_value
            );
            assert!(sol.is_some());
        }
    }

    #[test]
    fn assembly_is_deterministic() {
        let a = crate::sdp::sdpa::to_sdpa_string(&constant_certificate_program(0).sdp);
        let b = crate::sdp::sdpa::to_sdpa_string(&constant_certificate_program(0).sdp);
        assert_eq!(a, b);
    }

    #[test]
    fn every_monomial_has_one_row() {
        let prog = constant_certificate_program(0);
        // v - 1 on T: degree budget 2 -> monomials 1, x, x^2 ; same for v on X
        assert_eq!(prog.sdp.rows.len(), 6);
        // s0 basis {1, x}; multipliers of quadratics are constants
        assert_eq!(prog.sdp.blocks, vec![2, 1, 1, 2, 1]);
    }

    #[test]
    fn perturbed_gram_is_flagged() {
        let prog = constant_certificate_program(0);
        let (_, sol) = solve(&prog, &InteriorPoint::default(), &unit()).unwrap();
        let mut sol = sol.unwrap();
        let exact = postcheck(&prog, &sol, &unit(), 2000);
        assert!(exact <= 1e-6);
        // force an eigenvalue of the first Gram matrix to -1e-3
        let g = &sol.grams[0][0];
        let eig = nalgebra::SymmetricEigen::new(g.clone());
        let mut vals = eig.eigenvalues.clone();
        vals[0] = -1e-3;
        sol.grams[0][0] =
            &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
        assert!(postcheck(&prog, &sol, &unit(), 2000) > 0.0);
    }

    #[test]
    fn unknown_decision_is_rejected() {
        let space = DecisionSpace::new();
        let r = assemble(&space, vec![], AffineExpr::var(3), Sense::Minimize);
        assert!(matches!(
            r,
            Err(SosError::UnknownDecision { index: 3, size: 0 })
        ));
    }
}
