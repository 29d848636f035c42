//! Point sampling over boxes, semialgebraic regions and boundary pieces.
//!
//! Dimensions 1 and 2 use a uniform tensor grid; higher dimensions fall back to
//! seeded uniform random points so results stay reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{BoundaryPiece, BoundingBox};
use crate::poly::Polynomial;

const SAMPLE_SEED: u64 = 0x5eed_0cc0;

/// Roughly `n` points covering `bbox`, endpoints included.
pub fn box_points(bbox: &BoundingBox, n: usize) -> Vec<Vec<f64>> {
    let dim = bbox.dim();
    match dim {
        1 => {
            let k = n.max(2);
            (0..k)
                .map(|i| {
                    vec![lerp(
                        bbox.lower[0],
                        bbox.upper[0],
                        i as f64 / (k - 1) as f64,
                    )]
                })
                .collect()
        }
        2 => {
            let k = ((n as f64).sqrt().round() as usize).max(2);
            let mut out = Vec::with_capacity(k * k);
            for i in 0..k {
                for j in 0..k {
                    out.push(vec![
                        lerp(bbox.lower[0], bbox.upper[0], i as f64 / (k - 1) as f64),
                        lerp(bbox.lower[1], bbox.upper[1], j as f64 / (k - 1) as f64),
                    ]);
                }
            }
            out
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
            (0..n)
                .map(|_| {
                    (0..dim)
                        .map(|d| rng.random_range(bbox.lower[d]..=bbox.upper[d]))
                        .collect()
                })
                .collect()
        }
    }
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Points of `bbox` satisfying every `g >= 0`.
pub fn region_points(inequalities: &[Polynomial], bbox: &BoundingBox, n: usize) -> Vec<Vec<f64>> {
    box_points(bbox, n)
        .into_iter()
        .filter(|p| inequalities.iter().all(|g| g.eval(p) >= 0.0))
        .collect()
}

/// Points on `{equality = 0}` obtained by Newton projection of box samples,
/// kept when the side inequalities hold up to `1e-9`.
pub fn boundary_points(piece: &BoundaryPiece, bbox: &BoundingBox, n: usize) -> Vec<Vec<f64>> {
    let grad = piece.equality.grad();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut p in box_points(bbox, n) {
        let mut converged = false;
        for _ in 0..60 {
            let g = piece.equality.eval(&p);
            if g.abs() <= 1e-13 {
                converged = true;
                break;
            }
            let gv: Vec<f64> = grad.iter().map(|d| d.eval(&p)).collect();
            let nrm2: f64 = gv.iter().map(|v| v * v).sum();
            if nrm2 < 1e-24 {
                break;
            }
            for (x, d) in p.iter_mut().zip(&gv) {
                *x -= g * d / nrm2;
            }
        }
        if !converged {
            continue;
        }
        if piece.inequalities.iter().all(|h| h.eval(&p) >= -1e-9) {
            out.push(p);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    out.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() < 1e-12));
    out
}

/// About `n` points of the region `{g >= 0}`: a coarse pass over `bbox`
/// locates the region, then a grid of `n` points covers its own bounding box.
pub fn region_points_refined(
    inequalities: &[Polynomial],
    bbox: &BoundingBox,
    n: usize,
) -> Vec<Vec<f64>> {
    let coarse = region_points(inequalities, bbox, n);
    if coarse.is_empty() {
        return coarse;
    }
    let dim = bbox.dim();
    let mut lo = coarse[0].clone();
    let mut hi = coarse[0].clone();
    for p in &coarse {
        for d in 0..dim {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let per_axis = (n as f64).powf(1.0 / dim.min(2) as f64).max(2.0);
    let inner = BoundingBox {
        lower: (0..dim)
            .map(|d| (lo[d] - (bbox.upper[d] - bbox.lower[d]) / per_axis).max(bbox.lower[d]))
            .collect(),
        upper: (0..dim)
            .map(|d| (hi[d] + (bbox.upper[d] - bbox.lower[d]) / per_axis).min(bbox.upper[d]))
            .collect(),
    };
    let mut fine = region_points(inequalities, &inner, n);
    if fine.is_empty() {
        fine = coarse;
    }
    fine
}
