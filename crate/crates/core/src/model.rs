//! Problem description: polynomial SDE, semialgebraic safe and target sets,
//! horizon and occupation threshold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::Polynomial;
use crate::sample;

/// Strict margin used when checking that the target sits inside the safe
/// interior.
pub const CONTAINMENT_MARGIN: f64 = 1e-6;
/// Grid size used by the containment check.
pub const CONTAINMENT_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{what}: expected dimension {expected}, found {found}")]
    Dimension {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("a semialgebraic set needs at least one inequality")]
    NoInequalities,
    #[error("target must be a single polynomial inequality, found {0}")]
    UnsupportedTarget(usize),
    #[error("bounding box lower bound exceeds upper bound in coordinate {0}")]
    EmptyBox(usize),
}

/// `dX = f(X) dt + sigma(X) dW`, `X_0 = x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdeModel {
    drift: Vec<Polynomial>,
    diffusion: Vec<Vec<Polynomial>>,
    brownian_dim: usize,
    initial_state: Vec<f64>,
}

impl SdeModel {
    /// `diffusion` is row-major, `n` rows of `m` entries.
    pub fn new(
        drift: Vec<Polynomial>,
        diffusion: Vec<Vec<Polynomial>>,
        initial_state: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let n = drift.len();
        for (i, f) in drift.iter().enumerate() {
            if f.dim() != n {
                return Err(ModelError::Dimension {
                    what: format!("drift[{i}]"),
                    expected: n,
                    found: f.dim(),
                });
            }
        }
        if diffusion.len() != n {
            return Err(ModelError::Dimension {
                what: "diffusion rows".into(),
                expected: n,
                found: diffusion.len(),
            });
        }
        let m = diffusion.first().map(Vec::len).unwrap_or(0);
        for (i, row) in diffusion.iter().enumerate() {
            if row.len() != m {
                return Err(ModelError::Dimension {
                    what: format!("diffusion[{i}] columns"),
                    expected: m,
                    found: row.len(),
                });
            }
            for (k, s) in row.iter().enumerate() {
                if s.dim() != n {
                    return Err(ModelError::Dimension {
                        what: format!("diffusion[{i}][{k}]"),
                        expected: n,
                        found: s.dim(),
                    });
                }
            }
        }
        if initial_state.len() != n {
            return Err(ModelError::Dimension {
                what: "initial_state".into(),
                expected: n,
                found: initial_state.len(),
            });
        }
        Ok(SdeModel {
            drift,
            diffusion,
            brownian_dim: m,
            initial_state,
        })
    }

    /// One-dimensional model with scalar noise.
    pub fn scalar(drift: Polynomial, diffusion: Polynomial, x0: f64) -> Result<Self, ModelError> {
        Self::new(vec![drift], vec![vec![diffusion]], vec![x0])
    }

    pub fn dimension(&self) -> usize {
        self.drift.len()
    }

    pub fn brownian_dim(&self) -> usize {
        self.brownian_dim
    }

    pub fn drift(&self) -> &[Polynomial] {
        &self.drift
    }

    pub fn diffusion(&self) -> &[Vec<Polynomial>] {
        &self.diffusion
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.initial_state
    }

    pub fn drift_degree(&self) -> u32 {
        self.drift.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn diffusion_degree(&self) -> u32 {
        self.diffusion
            .iter()
            .flatten()
            .map(Polynomial::degree)
            .max()
            .unwrap_or(0)
    }

    fn with_initial_state(&self, x0: Vec<f64>) -> Self {
        SdeModel {
            initial_state: x0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    OpenInterior,
    Closed,
}

/// `{x : g_i(x) >= 0 for all i}` (or `> 0` for [`SetKind::OpenInterior`]).
///
/// `redundant` holds inequalities appended only to make the description
/// Archimedean; they do not change membership and contribute no boundary
/// pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct SemialgebraicSet {
    dim: usize,
    inequalities: Vec<Polynomial>,
    redundant: Vec<Polynomial>,
    kind: SetKind,
}

impl SemialgebraicSet {
    pub fn new(
        dim: usize,
        inequalities: Vec<Polynomial>,
        kind: SetKind,
    ) -> Result<Self, ModelError> {
        if inequalities.is_empty() {
            return Err(ModelError::NoInequalities);
        }
        for (i, g) in inequalities.iter().enumerate() {
            if g.dim() != dim {
                return Err(ModelError::Dimension {
                    what: format!("inequality {i}"),
                    expected: dim,
                    found: g.dim(),
                });
            }
        }
        Ok(SemialgebraicSet {
            dim,
            inequalities,
            redundant: Vec::new(),
            kind,
        })
    }

    /// `{(b - x)(x - a) >= 0}` in one dimension.
    pub fn interval(a: f64, b: f64, kind: SetKind) -> Self {
        let g = &Polynomial::univariate(&[b, -1.0]) * &Polynomial::univariate(&[-a, 1.0]);
        Self::new(1, vec![g], kind).expect("one inequality")
    }

    /// `{r^2 - |x - c|^2 >= 0}`.
    pub fn ball(center: &[f64], radius: f64, kind: SetKind) -> Self {
        let dim = center.len();
        Self::new(dim, vec![ball_polynomial(center, radius * radius)], kind)
            .expect("one inequality")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn inequalities(&self) -> &[Polynomial] {
        &self.inequalities
    }

    pub fn redundant(&self) -> &[Polynomial] {
        &self.redundant
    }

    /// Defining plus redundant inequalities, as used by the SOS encoding.
    pub fn all_inequalities(&self) -> Vec<Polynomial> {
        self.inequalities
            .iter()
            .chain(&self.redundant)
            .cloned()
            .collect()
    }

    pub fn min_value(&self, x: &[f64]) -> f64 {
        self.inequalities
            .iter()
            .map(|g| g.eval(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let m = self.min_value(x);
        match self.kind {
            SetKind::OpenInterior => m > 0.0,
            SetKind::Closed => m >= 0.0,
        }
    }

    /// Membership in the closure `{g_i >= 0}` regardless of kind.
    pub fn closure_contains(&self, x: &[f64]) -> bool {
        self.min_value(x) >= 0.0
    }

    fn push_redundant(&mut self, g: Polynomial) {
        let present = self
            .inequalities
            .iter()
            .chain(&self.redundant)
            .any(|h| positively_proportional(h, &g));
        if !present {
            self.redundant.push(g);
        }
    }
}

fn ball_polynomial(center: &[f64], r2: f64) -> Polynomial {
    let dim = center.len();
    let mut p = Polynomial::constant(dim, r2);
    for (i, &c) in center.iter().enumerate() {
        let d = &Polynomial::var(dim, i) - &Polynomial::constant(dim, c);
        p = &p - &(&d * &d);
    }
    p
}

/// `a = k b` for some `k > 0`, up to relative `1e-12`.
fn positively_proportional(a: &Polynomial, b: &Polynomial) -> bool {
    if a.n_terms() != b.n_terms() || a.is_zero() {
        return false;
    }
    let Some((m0, c0)) = b.terms().next() else {
        return false;
    };
    let k = a.coefficient(m0) / c0;
    if !(k > 0.0) {
        return false;
    }
    b.terms()
        .all(|(m, c)| (a.coefficient(m) - k * c).abs() <= 1e-12 * a.max_abs_coefficient())
}

/// One piece `{equality = 0, inequalities >= 0}` of a boundary cover.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPiece {
    pub equality: Polynomial,
    pub inequalities: Vec<Polynomial>,
}

/// For each defining inequality `g_i`, the piece `{g_i = 0, g_j >= 0, j != i}`.
/// Their union contains the boundary of the set.
pub fn boundary_of(safe: &SemialgebraicSet) -> Vec<BoundaryPiece> {
    let all = safe.all_inequalities();
    (0..safe.inequalities.len())
        .map(|i| BoundaryPiece {
            equality: safe.inequalities[i].clone(),
            inequalities: all
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, g)| g.clone())
                .collect(),
        })
        .collect()
}

/// `{g_i >= 0 for all i, -h >= 0}`: a closed superset of the closure of
/// `safe \ target`, where the target is `{h >= 0}`.
pub fn complement_within(
    safe: &SemialgebraicSet,
    target: &SemialgebraicSet,
) -> Result<SemialgebraicSet, ModelError> {
    if target.inequalities.len() != 1 {
        return Err(ModelError::UnsupportedTarget(target.inequalities.len()));
    }
    let mut ineqs = safe.inequalities.clone();
    ineqs.push(-&target.inequalities[0]);
    Ok(SemialgebraicSet {
        dim: safe.dim,
        inequalities: ineqs,
        redundant: safe.redundant.clone(),
        kind: SetKind::Closed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ModelError> {
        if lower.len() != upper.len() {
            return Err(ModelError::Dimension {
                what: "bounding box upper".into(),
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if let Some(i) = lower.iter().zip(&upper).position(|(l, u)| !(l < u)) {
            return Err(ModelError::EmptyBox(i));
        }
        Ok(BoundingBox { lower, upper })
    }

    pub fn unit(dim: usize) -> Self {
        BoundingBox {
            lower: vec![-1.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    pub fn half_widths(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (u - l))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    pub fn expanded(&self, factor: f64) -> BoundingBox {
        let c = self.center();
        let h = self.half_widths();
        BoundingBox {
            lower: c.iter().zip(&h).map(|(c, h)| c - factor * h).collect(),
            upper: c.iter().zip(&h).map(|(c, h)| c + factor * h).collect(),
        }
    }
}

/// Affine change of variables `x = center + scale * y` mapping the unit box to
/// a bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxScaling {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

impl BoxScaling {
    pub fn of(bbox: &BoundingBox) -> Self {
        BoxScaling {
            center: bbox.center(),
            scale: bbox.half_widths(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.center.iter().all(|&c| c == 0.0) && self.scale.iter().all(|&s| s == 1.0)
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.center.iter().zip(&self.scale))
            .map(|(x, (c, s))| (x - c) / s)
            .collect()
    }

    pub fn from_unit(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(self.center.iter().zip(&self.scale))
            .map(|(y, (c, s))| c + s * y)
            .collect()
    }

    /// `p(x)` rewritten as a polynomial in unit coordinates `y`.
    pub fn pull_back(&self, p: &Polynomial) -> Polynomial {
        if self.is_identity() {
            return p.clone();
        }
        p.compose_affine(&self.center, &self.scale)
    }

    /// Inverse of [`Self::pull_back`].
    pub fn push_forward(&self, q: &Polynomial) -> Polynomial {
        if self.is_identity() {
            return q.clone();
        }
        let c: Vec<f64> = self
            .center
            .iter()
            .zip(&self.scale)
            .map(|(c, s)| -c / s)
            .collect();
        let s: Vec<f64> = self.scale.iter().map(|s| 1.0 / s).collect();
        q.compose_affine(&c, &s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    NonPositiveHorizon,
    NonPositiveThreshold,
    ThresholdExceedsHorizon,
    DimensionMismatch,
    SafeSetNotOpen,
    TargetSetNotClosed,
    TargetRepresentation,
    TargetEmpty,
    TargetNotInSafeInterior,
    InitialStateOutsideSafe,
    SafeSetExceedsBoundingBox,
}

/// A detected problem-description defect. `field` names the offending part of
/// the problem (`"horizon"`, `"target"`, ...).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub field: &'static str,
    pub message: String,
}

impl Violation {
    fn new(kind: ViolationKind, field: &'static str, message: impl Into<String>) -> Self {
        Violation {
            kind,
            field,
            message: message.into(),
        }
    }
}

/// Estimate `P(O_T(H) >= K)` bounds for this description.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationProblem {
    pub model: SdeModel,
    pub safe: SemialgebraicSet,
    pub target: SemialgebraicSet,
    pub horizon: f64,
    pub threshold: f64,
    pub bounding_box: BoundingBox,
}

impl OccupationProblem {
    /// Assembles a problem and appends the bounding-box ball
    /// `R^2 - |x - c|^2 >= 0` to the safe set when it is not already present.
    pub fn new(
        model: SdeModel,
        mut safe: SemialgebraicSet,
        target: SemialgebraicSet,
        horizon: f64,
        threshold: f64,
        bounding_box: BoundingBox,
    ) -> Self {
        if bounding_box.dim() == safe.dim() {
            let c = bounding_box.center();
            let r2: f64 = bounding_box.half_widths().iter().map(|h| h * h).sum();
            safe.push_redundant(ball_polynomial(&c, r2));
        }
        OccupationProblem {
            model,
            safe,
            target,
            horizon,
            threshold,
            bounding_box,
        }
    }

    pub fn dimension(&self) -> usize {
        self.model.dimension()
    }

    /// Same problem with a different threshold.
    pub fn with_threshold(&self, threshold: f64) -> Self {
        OccupationProblem {
            threshold,
            ..self.clone()
        }
    }

    /// The problem expressed in unit-box coordinates, with the scaling used.
    pub fn normalized(&self) -> (OccupationProblem, BoxScaling) {
        let sc = BoxScaling::of(&self.bounding_box);
        if sc.is_identity() {
            return (self.clone(), sc);
        }
        let n = self.dimension();
        let drift = self
            .model
            .drift()
            .iter()
            .enumerate()
            .map(|(i, f)| sc.pull_back(f).scale(1.0 / sc.scale[i]))
            .collect();
        let diffusion = self
            .model
            .diffusion()
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .map(|s| sc.pull_back(s).scale(1.0 / sc.scale[i]))
                    .collect()
            })
            .collect();
        let model = SdeModel::new(drift, diffusion, sc.to_unit(self.model.initial_state()))
            .expect("shape preserved");
        let map_set = |s: &SemialgebraicSet| SemialgebraicSet {
            dim: n,
            inequalities: s.inequalities.iter().map(|g| sc.pull_back(g)).collect(),
            redundant: s.redundant.iter().map(|g| sc.pull_back(g)).collect(),
            kind: s.kind,
        };
        (
            OccupationProblem {
                model,
                safe: map_set(&self.safe),
                target: map_set(&self.target),
                horizon: self.horizon,
                threshold: self.threshold,
                bounding_box: BoundingBox::unit(n),
            },
            sc,
        )
    }

    pub fn with_initial_state(&self, x0: Vec<f64>) -> Self {
        OccupationProblem {
            model: self.model.with_initial_state(x0),
            ..self.clone()
        }
    }
}

/// Every detected violation of the standing assumptions; empty means valid.
pub fn validate(problem: &OccupationProblem) -> Vec<Violation> {
    use ViolationKind::*;
    let mut out = Vec::new();
    let n = problem.dimension();
    if !(problem.horizon > 0.0) || !problem.horizon.is_finite() {
        out.push(Violation::new(
            NonPositiveHorizon,
            "horizon",
            "horizon must be positive and finite",
        ));
    }
    if !(problem.threshold > 0.0) {
        out.push(Violation::new(
            NonPositiveThreshold,
            "threshold",
            "threshold must be positive",
        ));
    }
    if problem.threshold > problem.horizon {
        out.push(Violation::new(
            ThresholdExceedsHorizon,
            "threshold",
            format!(
                "threshold exceeds horizon ({} > {})",
                problem.threshold, problem.horizon
            ),
        ));
    }
    let dims_ok =
        problem.safe.dim() == n && problem.target.dim() == n && problem.bounding_box.dim() == n;
    if !dims_ok {
        out.push(Violation::new(
            DimensionMismatch,
            "problem",
            format!(
                "dimension mismatch: model {n}, safe {}, target {}, bounding box {}",
                problem.safe.dim(),
                problem.target.dim(),
                problem.bounding_box.dim()
            ),
        ));
        return out;
    }
    if problem.safe.kind() != SetKind::OpenInterior {
        out.push(Violation::new(
            SafeSetNotOpen,
            "safe",
            "safe set must be an open interior",
        ));
    }
    if problem.target.kind() != SetKind::Closed {
        out.push(Violation::new(
            TargetSetNotClosed,
            "target",
            "target set must be closed",
        ));
    }
    if problem.target.inequalities().len() != 1 {
        out.push(Violation::new(
            TargetRepresentation,
            "target",
            "target must be described by exactly one polynomial inequality",
        ));
    }

    if !problem.safe.contains(problem.model.initial_state()) {
        out.push(Violation::new(
            InitialStateOutsideSafe,
            "initial_state",
            "initial state is not in the safe interior",
        ));
    }

    // The safe set must lie in the declared bounding box.
    let wide = problem.bounding_box.expanded(1.5);
    let escaped = sample::box_points(&wide, CONTAINMENT_SAMPLES)
        .into_iter()
        .any(|p| !problem.bounding_box.contains(&p) && problem.safe.contains(&p));
    if escaped {
        out.push(Violation::new(
            SafeSetExceedsBoundingBox,
            "bounding_box",
            "safe set extends beyond the bounding box",
        ));
    }

    // Target containment: locate the target on an enlarged box, then resample
    // its own bounding box.
    let found: Vec<Vec<f64>> = sample::box_points(&wide, CONTAINMENT_SAMPLES)
        .into_iter()
        .filter(|p| problem.target.closure_contains(p))
        .collect();
    if found.is_empty() {
        out.push(Violation::new(
            TargetEmpty,
            "target",
            "target set appears empty",
        ));
        return out;
    }
    let mut lo = found[0].clone();
    let mut hi = found[0].clone();
    for p in &found {
        for d in 0..n {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    // pad by one coarse grid cell so the true extent is covered
    let cell: Vec<f64> = wide
        .half_widths()
        .iter()
        .map(|h| 2.0 * h / (CONTAINMENT_SAMPLES as f64).powf(1.0 / n.min(2) as f64))
        .collect();
    let tbox = BoundingBox {
        lower: lo.iter().zip(&cell).map(|(l, c)| l - c).collect(),
        upper: hi.iter().zip(&cell).map(|(h, c)| h + c).collect(),
    };
    let outside = sample::box_points(&tbox, CONTAINMENT_SAMPLES)
        .into_iter()
        .filter(|p| problem.target.closure_contains(p))
        .any(|p| problem.safe.min_value(&p) <= CONTAINMENT_MARGIN);
    if outside {
        out.push(Violation::new(
            TargetNotInSafeInterior,
            "target",
            "target not inside safe interior",
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example1() -> OccupationProblem {
        let model = SdeModel::scalar(
            Polynomial::univariate(&[0.0, -5.0, 0.0, 15.0]),
            Polynomial::univariate(&[0.0, 1.0]),
            0.5,
        )
        .unwrap();
        OccupationProblem::new(
            model,
            SemialgebraicSet::interval(-1.0, 1.0, SetKind::OpenInterior),
            SemialgebraicSet::interval(-0.1, 0.1, SetKind::Closed),
            10.0,
            2.0,
            BoundingBox::unit(1),
        )
    }

    #[test]
    fn example1_is_valid() {
        let p = example1();
        assert!(validate(&p).is_empty(), "{:?}", validate(&p));
        // [-1, 1] already matches its bounding ball
        assert!(p.safe.redundant().is_empty());
    }

    #[test]
    fn threshold_beyond_horizon() {
        let p = example1().with_threshold(11.0);
        let v = validate(&p);
        assert!(v
            .iter()
            .any(|v| v.kind == ViolationKind::ThresholdExceedsHorizon
                && v.message.contains("threshold exceeds horizon")));
    }

    #[test]
    fn target_outside_safe_interior() {
        let mut p = example1();
        p.target = SemialgebraicSet::interval(0.9, 1.1, SetKind::Closed);
        let v = validate(&p);
        assert!(v
            .iter()
            .any(|v| v.kind == ViolationKind::TargetNotInSafeInterior));
        assert!(v[0].message.contains("target not inside safe interior"));
    }

    #[test]
    fn initial_state_checked() {
        let p = example1().with_initial_state(vec![1.0]);
        assert!(validate(&p)
            .iter()
            .any(|v| v.kind == ViolationKind::InitialStateOutsideSafe));
    }

    #[test]
    fn boundary_pieces() {
        let safe = SemialgebraicSet::interval(-1.0, 1.0, SetKind::OpenInterior);
        let pieces = boundary_of(&safe);
        assert_eq!(pieces.len(), 1);
        let pts = sample::boundary_points(&pieces[0], &BoundingBox::unit(1).expanded(1.2), 1000);
        assert_eq!(pts.len(), 2);
        assert!((pts[0][0] + 1.0).abs() < 1e-12 && (pts[1][0] - 1.0).abs() < 1e-12);

        let bx = SemialgebraicSet::new(
            2,
            vec![
                Polynomial::from_terms(2, [(vec![0, 0], 1.0), (vec![2, 0], -1.0)]).unwrap(),
                Polynomial::from_terms(2, [(vec![0, 0], 1.0), (vec![0, 2], -1.0)]).unwrap(),
            ],
            SetKind::OpenInterior,
        )
        .unwrap();
        assert_eq!(boundary_of(&bx).len(), 2);

        let disc = SemialgebraicSet::ball(&[0.0, 0.0], 1.0, SetKind::OpenInterior);
        let pieces = boundary_of(&disc);
        assert_eq!(pieces.len(), 1);
        let pts = sample::boundary_points(&pieces[0], &BoundingBox::unit(2).expanded(1.2), 400);
        assert!(pts.len() > 50);
        for p in pts {
            assert!(pieces[0].equality.eval(&p).abs() <= 1e-12);
        }
    }

    #[test]
    fn box_safe_set_gets_archimedean_ball() {
        let bx = SemialgebraicSet::new(
            2,
            vec![
                Polynomial::from_terms(2, [(vec![0, 0], 1.0), (vec![2, 0], -1.0)]).unwrap(),
                Polynomial::from_terms(2, [(vec![0, 0], 1.0), (vec![0, 2], -1.0)]).unwrap(),
            ],
            SetKind::OpenInterior,
        )
        .unwrap();
        let model = SdeModel::new(
            vec![Polynomial::zero(2), Polynomial::zero(2)],
            vec![vec![Polynomial::zero(2)], vec![Polynomial::zero(2)]],
            vec![0.0, 0.0],
        )
        .unwrap();
        let p = OccupationProblem::new(
            model,
            bx,
            SemialgebraicSet::ball(&[0.0, 0.0], 0.5, SetKind::Closed),
            1.0,
            0.5,
            BoundingBox::unit(2),
        );
        assert_eq!(p.safe.redundant().len(), 1);
        assert_eq!(p.safe.redundant()[0].eval(&[1.0, 1.0]), 0.0);
        // the ball adds no boundary piece
        assert_eq!(boundary_of(&p.safe).len(), 2);
        assert!(validate(&p).is_empty());
    }

    #[test]
    fn complement_examples() {
        let safe = SemialgebraicSet::interval(-1.0, 1.0, SetKind::OpenInterior);
        let t = SemialgebraicSet::interval(-0.1, 0.1, SetKind::Closed);
        let c = complement_within(&safe, &t).unwrap();
        let inside = |x: f64| c.closure_contains(&[x]);
        assert!(inside(-1.0) && inside(-0.1) && inside(0.1) && inside(0.5));
        assert!(!inside(0.0) && !inside(0.05) && !inside(1.01));

        let t2 = SemialgebraicSet::interval(0.1, 0.5, SetKind::Closed);
        let c2 = complement_within(&safe, &t2).unwrap();
        // sign table: [-1, 0.1] and [0.5, 1]
        for (x, expect) in [
            (-0.9, true),
            (0.0, true),
            (0.3, false),
            (0.7, true),
            (1.2, false),
        ] {
            assert_eq!(c2.closure_contains(&[x]), expect, "x = {x}");
        }

        let two = SemialgebraicSet::new(
            1,
            vec![
                Polynomial::univariate(&[1.0]),
                Polynomial::univariate(&[1.0]),
            ],
            SetKind::Closed,
        )
        .unwrap();
        assert_eq!(
            complement_within(&safe, &two),
            Err(ModelError::UnsupportedTarget(2))
        );

        // target equal to the closure: complement is only the boundary
        let whole = SemialgebraicSet::interval(-1.0, 1.0, SetKind::Closed);
        let c3 = complement_within(&safe, &whole).unwrap();
        assert!(!c3.closure_contains(&[0.3]));
    }

    #[test]
    fn normalization_round_trip() {
        let model = SdeModel::scalar(
            Polynomial::univariate(&[1.0, -2.0]),
            Polynomial::univariate(&[0.5]),
            3.0,
        )
        .unwrap();
        let p = OccupationProblem::new(
            model,
            SemialgebraicSet::interval(2.0, 6.0, SetKind::OpenInterior),
            SemialgebraicSet::interval(3.5, 4.5, SetKind::Closed),
            1.0,
            0.5,
            BoundingBox::new(vec![2.0], vec![6.0]).unwrap(),
        );
        let (q, sc) = p.normalized();
        assert_eq!(q.model.initial_state(), &[-0.5]);
        let v = Polynomial::univariate(&[0.3, 1.0, -0.25]);
        let back = sc.push_forward(&sc.pull_back(&v));
        for x in [2.0, 3.3, 6.0] {
            assert!((back.eval(&[x]) - v.eval(&[x])).abs() < 1e-12);
        }
        assert!(validate(&q).is_empty());
    }
}
