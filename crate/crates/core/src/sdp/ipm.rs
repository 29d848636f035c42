//! Infeasible-start primal-dual path-following method with the HKM search
//! direction and Mehrotra predictor-corrector steps.
//!
//! Free variables are kept as such and handled through the saddle-point
//! system `[M A_f; A_f^T 0]`. When the main iteration does not converge, an
//! auxiliary phase-one program decides whether the equality system admits a
//! PSD point at all.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use super::dd::{Dd, DdLu, DdMat};
use super::{
    BlockEntry, EqualityRow, SdpBackend, SdpError, SdpOutcome, SdpProblem, SdpSolution, SolveStatus,
};

#[derive(Debug, Clone)]
pub struct IpmSettings {
    pub max_iterations: usize,
    /// Relative primal/dual infeasibility and gap target.
    pub tolerance: f64,
    /// Feasibility needed to accept a run that stalled before `tolerance`.
    pub accept_feasibility: f64,
    pub accept_gap: f64,
    /// Phase-one optimum above which the program is declared infeasible.
    pub infeasibility_threshold: f64,
    pub step_fraction: f64,
}

impl Default for IpmSettings {
    fn default() -> Self {
        IpmSettings {
            max_iterations: 150,
            tolerance: 1e-10,
            accept_feasibility: 1e-8,
            accept_gap: 1e-7,
            infeasibility_threshold: 1e-7,
            step_fraction: 0.95,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct InteriorPoint {
    pub settings: IpmSettings,
}

impl InteriorPoint {
    pub fn new(settings: IpmSettings) -> Self {
        InteriorPoint { settings }
    }
}

impl SdpBackend for InteriorPoint {
    fn name(&self) -> &str {
        "occucert-ipm"
    }

    fn solve(&self, problem: &SdpProblem) -> Result<SdpOutcome, SdpError> {
        problem.check()?;
        let data = Dense::from_problem(problem);
        let run = iterate(&data, &self.settings);
        let mut outcome = run.into_outcome(&data, problem, &self.settings);
        if outcome.status == SolveStatus::NumericalFailure {
            if let Some(t) = phase_one(problem, &self.settings) {
                if t > self.settings.infeasibility_threshold {
                    outcome.status = SolveStatus::Infeasible;
                    outcome.message = format!(
                        "phase-one optimum {t:.3e} > 0: no PSD point satisfies the equalities"
                    );
                    outcome.solution = None;
                } else {
                    outcome.message = format!("{} (phase-one optimum {t:.3e})", outcome.message);
                }
            }
        }
        Ok(outcome)
    }
}

/// Dense, row-scaled copy of the problem data.
struct Dense {
    m: usize,
    nf: usize,
    sizes: Vec<usize>,
    /// per block: (row, full symmetric matrix)
    a_blocks: Vec<Vec<(usize, DMatrix<f64>)>>,
    /// per block: (row, nonzero entries of the full symmetric matrix)
    a_sparse: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>>,
    a_free: DMatrix<f64>,
    b: DVector<f64>,
    c_free: DVector<f64>,
    c_blocks: Vec<DMatrix<f64>>,
    row_scale: Vec<f64>,
}

fn sym_from_entries(n: usize, entries: impl Iterator<Item = (usize, usize, f64)>) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for (i, j, v) in entries {
        a[(i, j)] += v;
        if i != j {
            a[(j, i)] += v;
        }
    }
    a
}

impl Dense {
    fn from_problem(p: &SdpProblem) -> Self {
        let m = p.rows.len();
        let nf = p.n_free;
        let row_scale: Vec<f64> = p
            .rows
            .iter()
            .map(|r| {
                let mx = r
                    .free
                    .iter()
                    .map(|&(_, v)| v.abs())
                    .chain(r.entries.iter().map(|e| e.value.abs()))
                    .fold(0.0, f64::max);
                if mx > 0.0 {
                    1.0 / mx
                } else {
                    1.0
                }
            })
            .collect();
        let mut a_blocks: Vec<Vec<(usize, DMatrix<f64>)>> = vec![Vec::new(); p.blocks.len()];
        let mut a_free = DMatrix::zeros(m, nf);
        let mut b = DVector::zeros(m);
        for (r, row) in p.rows.iter().enumerate() {
            let s = row_scale[r];
            b[r] = row.rhs * s;
            for &(k, v) in &row.free {
                a_free[(r, k)] += v * s;
            }
            let mut by_block: std::collections::BTreeMap<usize, Vec<&BlockEntry>> =
                Default::default();
            for e in &row.entries {
                by_block.entry(e.block).or_default().push(e);
            }
            for (blk, es) in by_block {
                let a = sym_from_entries(p.blocks[blk], es.iter().map(|e| (e.i, e.j, e.value * s)));
                a_blocks[blk].push((r, a));
            }
        }
        let mut c_free = DVector::zeros(nf);
        for &(k, v) in &p.objective_free {
            c_free[k] += v;
        }
        let c_blocks = p
            .blocks
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                sym_from_entries(
                    n,
                    p.objective_blocks
                        .iter()
                        .filter(|e| e.block == k)
                        .map(|e| (e.i, e.j, e.value)),
                )
            })
            .collect();
        let a_sparse = a_blocks
            .iter()
            .map(|rows| {
                rows.iter()
                    .map(|(r, a)| {
                        let nz = (0..a.nrows())
                            .flat_map(|i| (0..a.ncols()).map(move |j| (i, j)))
                            .filter(|&(i, j)| a[(i, j)] != 0.0)
                            .map(|(i, j)| (i, j, a[(i, j)]))
                            .collect();
                        (*r, nz)
                    })
                    .collect()
            })
            .collect();
        Dense {
            m,
            nf,
            sizes: p.blocks.clone(),
            a_blocks,
            a_sparse,
            a_free,
            b,
            c_free,
            c_blocks,
            row_scale,
        }
    }

    fn primal_objective(&self, xf: &DVector<f64>, xs: &[DMatrix<f64>]) -> f64 {
        self.c_free.dot(xf)
            + self
                .c_blocks
                .iter()
                .zip(xs)
                .map(|(c, x)| c.dot(x))
                .sum::<f64>()
    }
}

#[derive(Clone)]
struct Run {
    xf: DVector<f64>,
    xs: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    pinf: f64,
    dinf: f64,
    gap: f64,
    iterations: usize,
    converged: bool,
    message: String,
}

impl Run {
    fn into_outcome(self, d: &Dense, p: &SdpProblem, s: &IpmSettings) -> SdpOutcome {
        let finite = self
            .xf
            .iter()
            .chain(self.xs.iter().flat_map(|x| x.iter()))
            .all(|v| v.is_finite());
        let acceptable = finite
            && (self.converged
                || (self.pinf <= s.accept_feasibility
                    && self.dinf <= s.accept_feasibility
                    && self.gap <= s.accept_gap));
        let objective = d.primal_objective(&self.xf, &self.xs) + p.objective_offset;
        let status = if acceptable {
            SolveStatus::Optimal
        } else {
            SolveStatus::NumericalFailure
        };
        let dual: Vec<f64> = self
            .y
            .iter()
            .zip(&d.row_scale)
            .map(|(y, s)| y * s)
            .collect();
        SdpOutcome {
            status,
            objective,
            primal_infeasibility: self.pinf,
            dual_infeasibility: self.dinf,
            relative_gap: self.gap,
            iterations: self.iterations,
            message: self.message,
            solution: if finite {
                Some(SdpSolution {
                    free: self.xf.iter().copied().collect(),
                    blocks: self.xs,
                    dual,
                })
            } else {
                None
            },
        }
    }
}

fn symmetric(m: DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (&m + m.transpose())
}

fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let chol = Cholesky::new(x.clone())?;
    let l = chol.l();
    let w = l.solve_lower_triangular(dx)?;
    let w = l.solve_lower_triangular(&w.transpose())?;
    let w = 0.5 * (&w + w.transpose());
    let lmin = SymmetricEigen::new(w)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Some(if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    })
}

fn merit(r: &Run) -> f64 {
    r.pinf.max(r.dinf).max(r.gap)
}

/// `<A, P>` for a sparse symmetric `A` given by its full entry list.
fn sparse_dot(a: &[(usize, usize, f64)], p: &DdMat) -> Dd {
    a.iter()
        .fold(Dd::ZERO, |acc, &(i, j, v)| acc + p.at(i, j) * v)
}

/// `X A` for a sparse symmetric `A`.
fn times_sparse(x: &DdMat, a: &[(usize, usize, f64)]) -> DdMat {
    let mut out = DdMat::zeros(x.rows, x.rows);
    for &(p, c, v) in a {
        for r in 0..x.rows {
            let w = out.at(r, c) + x.at(r, p) * v;
            *out.at_mut(r, c) = w;
        }
    }
    out
}

struct Direction {
    dy: DVector<f64>,
    dxf: DVector<f64>,
    dxs: Vec<DMatrix<f64>>,
    dss: Vec<DMatrix<f64>>,
    dxs_dd: Vec<DdMat>,
    dss_dd: Vec<DdMat>,
}

fn iterate(d: &Dense, s: &IpmSettings) -> Run {
    let nblocks = d.sizes.len();
    let big_n: usize = d.sizes.iter().sum();
    let b_norm = d.b.norm();
    let c_norm = d.c_free.norm() + d.c_blocks.iter().map(|c| c.norm()).sum::<f64>();

    if d.m == 0 && big_n == 0 {
        return Run {
            xf: DVector::zeros(d.nf),
            xs: Vec::new(),
            y: DVector::zeros(0),
            pinf: 0.0,
            dinf: d.c_free.norm(),
            gap: 0.0,
            iterations: 0,
            converged: d.c_free.norm() == 0.0,
            message: "empty program".into(),
        };
    }

    // Starting point scaled to the data.
    let mut xs: Vec<DMatrix<f64>> = Vec::with_capacity(nblocks);
    let mut ss: Vec<DMatrix<f64>> = Vec::with_capacity(nblocks);
    for k in 0..nblocks {
        let n = d.sizes[k] as f64;
        let mut xi: f64 = 10f64.max(n.sqrt());
        let mut eta: f64 = 10f64.max(n.sqrt()).max(d.c_blocks[k].norm());
        for (r, a) in &d.a_blocks[k] {
            let an = a.norm();
            xi = xi.max(n * (1.0 + d.b[*r].abs()) / (1.0 + an));
            eta = eta.max(an);
        }
        xs.push(DMatrix::identity(d.sizes[k], d.sizes[k]) * xi);
        ss.push(DMatrix::identity(d.sizes[k], d.sizes[k]) * eta);
    }
    let mut xf: DVector<f64> = DVector::zeros(d.nf);
    let mut y: DVector<f64> = DVector::zeros(d.m);

    let mut best: Option<Run> = None;
    let finish = |best: Option<Run>, last: Run, message: String| -> Run {
        let mut out = match best {
            Some(b) if merit(&b) < merit(&last) => b,
            _ => last,
        };
        out.message = message;
        out
    };
    let mut last = Run {
        xf: xf.clone(),
        xs: xs.clone(),
        y: y.clone(),
        pinf: f64::INFINITY,
        dinf: f64::INFINITY,
        gap: f64::INFINITY,
        iterations: 0,
        converged: false,
        message: String::new(),
    };

    for it in 0..s.max_iterations {
        let xs_dd: Vec<DdMat> = xs.iter().map(DdMat::from_f64).collect();
        let ss_dd: Vec<DdMat> = ss.iter().map(DdMat::from_f64).collect();

        // residuals in extended precision
        let mut rp: Vec<Dd> = (0..d.m).map(|r| Dd::new(d.b[r])).collect();
        for r in 0..d.m {
            for j in 0..d.nf {
                let a = d.a_free[(r, j)];
                if a != 0.0 {
                    rp[r] = rp[r] - Dd::new(xf[j]) * a;
                }
            }
        }
        for k in 0..nblocks {
            for (r, a) in &d.a_sparse[k] {
                rp[*r] = rp[*r] - sparse_dot(a, &xs_dd[k]);
            }
        }
        let rd: Vec<DdMat> = (0..nblocks)
            .map(|k| {
                let mut m = DdMat::from_f64(&d.c_blocks[k]);
                m.add_scaled(&ss_dd[k], Dd::new(-1.0));
                for (r, a) in &d.a_sparse[k] {
                    for &(i, j, v) in a {
                        let w = m.at(i, j) - Dd::new(y[*r]) * v;
                        *m.at_mut(i, j) = w;
                    }
                }
                m
            })
            .collect();
        let rf: Vec<Dd> = (0..d.nf)
            .map(|j| {
                (0..d.m).fold(Dd::new(d.c_free[j]), |acc, r| {
                    let a = d.a_free[(r, j)];
                    if a == 0.0 {
                        acc
                    } else {
                        acc - Dd::new(y[r]) * a
                    }
                })
            })
            .collect();

        let xs_dot: f64 = xs.iter().zip(&ss).map(|(x, z)| x.dot(z)).sum();
        let mu = if big_n > 0 {
            xs_dot / big_n as f64
        } else {
            0.0
        };
        let pobj = d.primal_objective(&xf, &xs);
        let dobj = d.b.dot(&y);
        let norm = |v: &[Dd]| v.iter().map(|x| x.to_f64().powi(2)).sum::<f64>();
        let pinf = norm(&rp).sqrt() / (1.0 + b_norm);
        let dinf =
            (rd.iter().map(|m| norm(&m.data)).sum::<f64>() + norm(&rf)).sqrt() / (1.0 + c_norm);
        let gap = (pobj - dobj).abs().max(xs_dot.abs()) / (1.0 + pobj.abs() + dobj.abs());

        if !(pinf.is_finite() && dinf.is_finite() && gap.is_finite()) {
            return finish(best, last, format!("non-finite iterate at iteration {it}"));
        }
        let current = Run {
            xf: xf.clone(),
            xs: xs.clone(),
            y: y.clone(),
            pinf,
            dinf,
            gap,
            iterations: it,
            converged: false,
            message: String::new(),
        };
        if best.as_ref().is_none_or(|b| merit(&current) < merit(b)) {
            best = Some(current.clone());
        }
        last = current;
        if pinf <= s.tolerance && dinf <= s.tolerance && gap <= s.tolerance {
            last.converged = true;
            last.message = format!("converged in {it} iterations");
            return last;
        }

        let sinv: Vec<DdMat> = match ss_dd
            .iter()
            .map(DdMat::spd_inverse)
            .collect::<Option<Vec<_>>>()
        {
            Some(v) => v,
            None => {
                return finish(
                    best,
                    last,
                    format!("dual slack lost definiteness at iteration {it}"),
                )
            }
        };

        // Schur complement of the HKM direction
        let dim = d.m + d.nf;
        let mut kkt = DdMat::zeros(dim, dim);
        for k in 0..nblocks {
            for (ri, ai) in &d.a_sparse[k] {
                let pmat = times_sparse(&xs_dd[k], ai).matmul(&sinv[k]);
                for (rj, aj) in &d.a_sparse[k] {
                    let v = kkt.at(*rj, *ri) + sparse_dot(aj, &pmat);
                    *kkt.at_mut(*rj, *ri) = v;
                }
            }
        }
        for i in 0..d.m {
            for j in 0..i {
                let v = (kkt.at(i, j) + kkt.at(j, i)) * 0.5;
                *kkt.at_mut(i, j) = v;
                *kkt.at_mut(j, i) = v;
            }
            for j in 0..d.nf {
                *kkt.at_mut(i, d.m + j) = Dd::new(d.a_free[(i, j)]);
                *kkt.at_mut(d.m + j, i) = Dd::new(d.a_free[(i, j)]);
            }
        }
        let Some(lu) = DdLu::new(kkt) else {
            return finish(
                best,
                last,
                format!("singular Newton system at iteration {it}"),
            );
        };

        let direction = |sigma_mu: f64, corr: Option<&[DdMat]>| -> Option<Direction> {
            let sm = Dd::new(sigma_mu);
            let base = |k: usize, ds: &DdMat| -> DdMat {
                let mut g = xs_dd[k].matmul(ds).matmul(&sinv[k]);
                for v in g.data.iter_mut() {
                    *v = -*v;
                }
                g.add_scaled(&sinv[k], sm);
                g.add_scaled(&xs_dd[k], Dd::new(-1.0));
                if let Some(c) = corr {
                    g.add_scaled(&c[k], Dd::new(-1.0));
                }
                g
            };
            let mut rhs: Vec<Dd> = rp.clone();
            for k in 0..nblocks {
                let g = base(k, &rd[k]);
                for (r, a) in &d.a_sparse[k] {
                    rhs[*r] = rhs[*r] - sparse_dot(a, &g);
                }
            }
            rhs.extend_from_slice(&rf);
            let sol = lu.solve(&rhs);
            if sol.iter().any(|v| !v.to_f64().is_finite()) {
                return None;
            }
            let mut dss_dd = Vec::with_capacity(nblocks);
            let mut dxs_dd = Vec::with_capacity(nblocks);
            for k in 0..nblocks {
                let mut dsk = rd[k].clone();
                for (r, a) in &d.a_sparse[k] {
                    for &(i, j, v) in a {
                        let w = dsk.at(i, j) - sol[*r] * v;
                        *dsk.at_mut(i, j) = w;
                    }
                }
                let dxk = base(k, &dsk).symmetrized();
                dss_dd.push(dsk);
                dxs_dd.push(dxk);
            }
            Some(Direction {
                dy: DVector::from_iterator(d.m, sol[..d.m].iter().map(|v| v.to_f64())),
                dxf: DVector::from_iterator(d.nf, sol[d.m..].iter().map(|v| v.to_f64())),
                dxs: dxs_dd.iter().map(DdMat::to_f64).collect(),
                dss: dss_dd.iter().map(DdMat::to_f64).collect(),
                dxs_dd,
                dss_dd,
            })
        };

        let steps = |dir: &Direction| -> Option<(f64, f64)> {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for k in 0..nblocks {
                ap = ap.min(max_step(&xs[k], &dir.dxs[k])?);
                ad = ad.min(max_step(&ss[k], &dir.dss[k])?);
            }
            Some((ap, ad))
        };

        // predictor
        let Some(aff) = direction(0.0, None) else {
            return finish(
                best,
                last,
                format!("singular Newton system at iteration {it}"),
            );
        };
        let Some((ap_max, ad_max)) = steps(&aff) else {
            return finish(best, last, format!("lost definiteness at iteration {it}"));
        };
        let ap = 1f64.min(ap_max);
        let ad = 1f64.min(ad_max);
        let mu_aff = if big_n > 0 {
            (0..nblocks)
                .map(|k| (&xs[k] + &aff.dxs[k] * ap).dot(&(&ss[k] + &aff.dss[k] * ad)))
                .sum::<f64>()
                / big_n as f64
        } else {
            0.0
        };
        let sigma = if mu > 0.0 {
            (mu_aff / mu).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };
        let corr: Vec<DdMat> = (0..nblocks)
            .map(|k| aff.dxs_dd[k].matmul(&aff.dss_dd[k]).matmul(&sinv[k]))
            .collect();

        // corrector
        let Some(dir) = direction(sigma * mu, Some(&corr)) else {
            return finish(
                best,
                last,
                format!("singular Newton system at iteration {it}"),
            );
        };
        let Some((ap_max, ad_max)) = steps(&dir) else {
            return finish(best, last, format!("lost definiteness at iteration {it}"));
        };
        let mut ap = 1f64.min(s.step_fraction * ap_max);
        let mut ad = 1f64.min(s.step_fraction * ad_max);
        // round-off can push a nearly singular iterate out of the cone; back off
        let mut next = None;
        for _ in 0..30 {
            if ap < 1e-12 && ad < 1e-12 {
                break;
            }
            let nx: Vec<DMatrix<f64>> = (0..nblocks)
                .map(|k| symmetric(&xs[k] + &dir.dxs[k] * ap))
                .collect();
            let ns: Vec<DMatrix<f64>> = (0..nblocks)
                .map(|k| symmetric(&ss[k] + &dir.dss[k] * ad))
                .collect();
            let bad_x = nx.iter().any(|m| Cholesky::new(m.clone()).is_none());
            let bad_s = ns.iter().any(|m| Cholesky::new(m.clone()).is_none());
            if !bad_x && !bad_s {
                next = Some((nx, ns));
                break;
            }
            if bad_x {
                ap *= 0.5;
            }
            if bad_s {
                ad *= 0.5;
            }
        }
        let Some((nx, ns)) = next else {
            return finish(
                best,
                last,
                format!("step length collapsed at iteration {it}"),
            );
        };
        log::trace!("it {it}: pinf {pinf:.2e} dinf {dinf:.2e} gap {gap:.2e} mu {mu:.2e} sigma {sigma:.2e} ap {ap:.3} ad {ad:.3}");
        xf += &dir.dxf * ap;
        xs = nx;
        ss = ns;
        y += &dir.dy * ad;
    }
    let mut out = finish(
        best,
        last,
        format!("iteration limit {} reached", s.max_iterations),
    );
    out.iterations = s.max_iterations;
    out
}

/// Minimizes `t >= 0` subject to `A(X) + t r0 = b`, where `r0` makes
/// `(X, t) = (I, 1)` feasible. A strictly positive optimum certifies that no
/// PSD point satisfies the original equalities.
fn phase_one(p: &SdpProblem, s: &IpmSettings) -> Option<f64> {
    let mut aux = p.clone();
    let t_block = aux.blocks.len();
    aux.blocks.push(1);
    aux.objective_free.clear();
    aux.objective_blocks = vec![BlockEntry {
        block: t_block,
        i: 0,
        j: 0,
        value: 1.0,
    }];
    aux.objective_offset = 0.0;
    aux.rows = p
        .rows
        .iter()
        .map(|row| {
            let trace: f64 = row
                .entries
                .iter()
                .filter(|e| e.i == e.j)
                .map(|e| e.value)
                .sum();
            let r0 = row.rhs - trace;
            let mut entries = row.entries.clone();
            if r0 != 0.0 {
                entries.push(BlockEntry {
                    block: t_block,
                    i: 0,
                    j: 0,
                    value: r0,
                });
            }
            EqualityRow {
                free: row.free.clone(),
                entries,
                rhs: row.rhs,
            }
        })
        .collect();
    let mut settings = s.clone();
    settings.tolerance = s.tolerance.max(1e-10);
    let d = Dense::from_problem(&aux);
    let run = iterate(&d, &settings);
    let ok = run.converged
        || (run.pinf <= s.accept_feasibility
            && run.dinf <= s.accept_feasibility
            && run.gap <= 1e-6);
    if ok {
        Some(run.xs[t_block][(0, 0)])
    } else {
        None
    }
}
