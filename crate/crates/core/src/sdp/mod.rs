//! Block semidefinite programs in equality form and a solver backend trait.
//!
//! ```text
//! minimize    c_f . x_f + sum_k <C_k, X_k>
//! subject to  A_f x_f + sum_k A_k(X_k) = b
//!             X_k PSD,  x_f free
//! ```
//!
//! Symmetric matrices are stored as upper-triangular sparse entries, with
//! `<A, X> = sum_ij A_ij X_ij` over the full symmetric matrix (the SDPA
//! convention).

mod dd;
mod ipm;
pub mod sdpa;

pub use ipm::{InteriorPoint, IpmSettings};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdpError {
    #[error("malformed SDP: {0}")]
    Malformed(String),
}

/// One upper-triangular entry `(block, i, j, value)` with `i <= j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEntry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// One linear equality `sum free + sum <A_k, X_k> = rhs`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EqualityRow {
    pub free: Vec<(usize, f64)>,
    pub entries: Vec<BlockEntry>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SdpProblem {
    pub n_free: usize,
    pub blocks: Vec<usize>,
    pub rows: Vec<EqualityRow>,
    pub objective_free: Vec<(usize, f64)>,
    pub objective_blocks: Vec<BlockEntry>,
    /// Constant added to the reported objective value.
    pub objective_offset: f64,
}

impl SdpProblem {
    pub fn check(&self) -> Result<(), SdpError> {
        let entry_ok = |e: &BlockEntry| {
            e.block < self.blocks.len() && e.i <= e.j && e.j < self.blocks[e.block]
        };
        for (r, row) in self.rows.iter().enumerate() {
            if row.free.iter().any(|&(k, _)| k >= self.n_free) {
                return Err(SdpError::Malformed(format!(
                    "row {r}: free index out of range"
                )));
            }
            if !row.entries.iter().all(entry_ok) {
                return Err(SdpError::Malformed(format!("row {r}: bad block entry")));
            }
            if !row.rhs.is_finite() {
                return Err(SdpError::Malformed(format!("row {r}: non-finite rhs")));
            }
        }
        if !self.objective_blocks.iter().all(entry_ok)
            || self.objective_free.iter().any(|&(k, _)| k >= self.n_free)
        {
            return Err(SdpError::Malformed("objective out of range".into()));
        }
        if self.blocks.iter().any(|&b| b == 0) {
            return Err(SdpError::Malformed("empty PSD block".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

/// Primal point of an [`SdpProblem`]; blocks are dense and symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub free: Vec<f64>,
    pub blocks: Vec<nalgebra::DMatrix<f64>>,
    pub dual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpOutcome {
    pub status: SolveStatus,
    pub objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    pub message: String,
    pub solution: Option<SdpSolution>,
}

/// A conic solver able to handle [`SdpProblem`]s.
pub trait SdpBackend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, problem: &SdpProblem) -> Result<SdpOutcome, SdpError>;
}

impl SdpSolution {
    /// `A_f x_f + sum_k A_k(X_k) - b` per row.
    pub fn residuals(&self, problem: &SdpProblem) -> Vec<f64> {
        problem
            .rows
            .iter()
            .map(|row| {
                let mut s = -row.rhs;
                for &(k, a) in &row.free {
                    s += a * self.free[k];
                }
                for e in &row.entries {
                    let x = self.blocks[e.block][(e.i, e.j)];
                    s += if e.i == e.j {
                        e.value * x
                    } else {
                        2.0 * e.value * x
                    };
                }
                s
            })
            .collect()
    }

    pub fn min_eigenvalues(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|b| {
                nalgebra::SymmetricEigen::new(b.clone())
                    .eigenvalues
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimize_scalar_above_one() {
        // minimize t s.t. [[t, 1], [1, 1]] PSD, i.e. t >= 1, written as
        // X = [[t, s], [s, u]] with s = 1, u = 1 and objective X_00.
        let p = SdpProblem {
            n_free: 0,
            blocks: vec![2],
            rows: vec![
                EqualityRow {
                    free: vec![],
                    entries: vec![BlockEntry {
                        block: 0,
                        i: 0,
                        j: 1,
                        value: 0.5,
                    }],
                    rhs: 1.0,
                },
                EqualityRow {
                    free: vec![],
                    entries: vec![BlockEntry {
                        block: 0,
                        i: 1,
                        j: 1,
                        value: 1.0,
                    }],
                    rhs: 1.0,
                },
            ],
            objective_free: vec![],
            objective_blocks: vec![BlockEntry {
                block: 0,
                i: 0,
                j: 0,
                value: 1.0,
            }],
            objective_offset: 0.0,
        };
        let out = InteriorPoint::default().solve(&p).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.objective - 1.0).abs() < 1e-7, "{}", out.objective);
    }

    #[test]
    fn scalar_block_with_free_variable() {
        // minimize t with t = y + 1 (free y), X = [t] PSD; y >= -1 at optimum
        let p = SdpProblem {
            n_free: 1,
            blocks: vec![1],
            rows: vec![EqualityRow {
                free: vec![(0, -1.0)],
                entries: vec![BlockEntry {
                    block: 0,
                    i: 0,
                    j: 0,
                    value: 1.0,
                }],
                rhs: 1.0,
            }],
            objective_free: vec![(0, 1.0)],
            objective_blocks: vec![],
            objective_offset: 0.0,
        };
        let out = InteriorPoint::default().solve(&p).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        let sol = out.solution.unwrap();
        assert!((sol.free[0] + 1.0).abs() < 1e-7);
    }

    #[test]
    fn infeasible_is_reported() {
        // X_00 = -1 with X PSD
        let p = SdpProblem {
            n_free: 0,
            blocks: vec![1],
            rows: vec![EqualityRow {
                free: vec![],
                entries: vec![BlockEntry {
                    block: 0,
                    i: 0,
                    j: 0,
                    value: 1.0,
                }],
                rhs: -1.0,
            }],
            objective_free: vec![],
            objective_blocks: vec![],
            objective_offset: 0.0,
        };
        let out = InteriorPoint::default().solve(&p).unwrap();
        assert_eq!(out.status, SolveStatus::Infeasible);
    }

    #[test]
    fn empty_problem_is_optimal() {
        let out = InteriorPoint::default()
            .solve(&SdpProblem::default())
            .unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert_eq!(out.objective, 0.0);
    }

    #[test]
    fn malformed_rejected() {
        let p = SdpProblem {
            n_free: 0,
            blocks: vec![1],
            rows: vec![EqualityRow {
                free: vec![(3, 1.0)],
                entries: vec![],
                rhs: 0.0,
            }],
            ..Default::default()
        };
        assert!(InteriorPoint::default().solve(&p).is_err());
    }
}
