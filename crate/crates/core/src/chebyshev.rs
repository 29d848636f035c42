//! Tensor Chebyshev polynomials `T_a(x) = prod_i T_{a_i}(x_i)`.
//!
//! Multi-indices reuse [`Monomial`] as an exponent-like tuple. On the unit box
//! this basis is far better conditioned than monomials, so SOS programs match
//! coefficients in it.

use std::collections::BTreeMap;

use crate::poly::{Monomial, Polynomial};

/// Chebyshev coefficients of `x^n`: `x^n = sum_k c_k T_k`.
fn power_in_chebyshev(n: u32) -> Vec<(u32, f64)> {
    // x^n = 2^{1-n} sum_{k <= n/2} C(n, k) T_{n-2k}, the T_0 term halved
    let mut out = Vec::new();
    let scale = 2f64.powi(1 - n as i32);
    let mut binom = 1.0;
    for k in 0..=n / 2 {
        if k > 0 {
            binom = binom * (n - k + 1) as f64 / k as f64;
        }
        let deg = n - 2 * k;
        let c = if deg == 0 {
            0.5 * scale * binom
        } else {
            scale * binom
        };
        out.push((deg, c));
    }
    if n == 0 {
        out = vec![(0, 1.0)];
    }
    out
}

/// Monomial coefficients of `T_k`.
fn chebyshev_in_powers(k: u32) -> Vec<f64> {
    let mut prev = vec![1.0];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for _ in 1..k {
        let mut next = vec![0.0; cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

fn tensor<F>(dim: usize, per_axis: F) -> Vec<(Monomial, f64)>
where
    F: Fn(usize) -> Vec<(u32, f64)>,
{
    let mut acc: Vec<(Vec<u32>, f64)> = vec![(Vec::with_capacity(dim), 1.0)];
    for i in 0..dim {
        let axis = per_axis(i);
        let mut next = Vec::with_capacity(acc.len() * axis.len());
        for (idx, c) in &acc {
            for &(k, w) in &axis {
                let mut j = idx.clone();
                j.push(k);
                next.push((j, c * w));
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|(j, c)| (Monomial::new(j), c))
        .collect()
}

/// Chebyshev expansion of a single monomial.
pub fn monomial_to_chebyshev(m: &Monomial) -> Vec<(Monomial, f64)> {
    tensor(m.dim(), |i| power_in_chebyshev(m.exponents()[i]))
}

pub fn to_chebyshev(p: &Polynomial) -> BTreeMap<Monomial, f64> {
    let mut out = BTreeMap::new();
    for (m, c) in p.terms() {
        for (idx, w) in monomial_to_chebyshev(m) {
            *out.entry(idx).or_insert(0.0) += c * w;
        }
    }
    out.retain(|_, v| *v != 0.0);
    out
}

/// Back to the monomial basis.
pub fn from_chebyshev(dim: usize, coeffs: &BTreeMap<Monomial, f64>) -> Polynomial {
    let mut p = Polynomial::zero(dim);
    for (idx, &c) in coeffs {
        let axes: Vec<Vec<f64>> = idx
            .exponents()
            .iter()
            .map(|&k| chebyshev_in_powers(k))
            .collect();
        for (m, w) in tensor(dim, |i| {
            axes[i]
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(e, c)| (e as u32, *c))
                .collect()
        }) {
            p.add_term(m, c * w);
        }
    }
    p
}

/// `T_a T_b` as a Chebyshev expansion, via `T_j T_k = (T_{j+k} + T_{|j-k|}) / 2`.
pub fn product(a: &Monomial, b: &Monomial) -> Vec<(Monomial, f64)> {
    let (ea, eb) = (a.exponents(), b.exponents());
    let mut out = tensor(a.dim(), |i| {
        let (j, k) = (ea[i], eb[i]);
        if j == 0 || k == 0 {
            vec![(j + k, 1.0)]
        } else if j == k {
            vec![(2 * j, 0.5), (0, 0.5)]
        } else {
            vec![(j + k, 0.5), (j.abs_diff(k), 0.5)]
        }
    });
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out.dedup_by(|x, y| {
        if x.0 == y.0 {
            y.1 += x.1;
            true
        } else {
            false
        }
    });
    out
}

/// Values `T_0(t), ..., T_k(t)`.
fn values_upto(k: u32, t: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(k as usize + 1);
    v.push(1.0);
    if k >= 1 {
        v.push(t);
    }
    for j in 2..=k as usize {
        v.push(2.0 * t * v[j - 1] - v[j - 2]);
    }
    v
}

pub fn eval(idx: &Monomial, x: &[f64]) -> f64 {
    idx.exponents()
        .iter()
        .zip(x)
        .map(|(&k, &t)| values_upto(k, t)[k as usize])
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_conversions() {
        // x^2 = (T_0 + T_2) / 2
        let c = to_chebyshev(&Polynomial::univariate(&[0.0, 0.0, 1.0]));
        assert_eq!(c[&Monomial::new(vec![0])], 0.5);
        assert_eq!(c[&Monomial::new(vec![2])], 0.5);
        // T_3 = 4x^3 - 3x
        assert_eq!(chebyshev_in_powers(3), vec![0.0, -3.0, 0.0, 4.0]);
    }

    #[test]
    fn round_trip_and_evaluation() {
        let p = Polynomial::from_terms(
            2,
            [
                (vec![3, 1], 2.0),
                (vec![0, 4], -1.5),
                (vec![1, 0], 0.25),
                (vec![0, 0], 3.0),
            ],
        )
        .unwrap();
        let c = to_chebyshev(&p);
        let back = from_chebyshev(2, &c);
        for (m, v) in p.terms() {
            assert!((back.coefficient(m) - v).abs() < 1e-13);
        }
        for x in [[0.3, -0.7], [0.9, 0.1], [-1.0, 1.0]] {
            let direct = p.eval(&x);
            let via: f64 = c.iter().map(|(i, w)| w * eval(i, &x)).sum();
            assert!((direct - via).abs() < 1e-12);
        }
    }

    #[test]
    fn product_matches_pointwise() {
        let a = Monomial::new(vec![3, 1]);
        let b = Monomial::new(vec![2, 1]);
        let prod = product(&a, &b);
        for x in [[0.2, 0.5], [-0.9, 0.3]] {
            let lhs = eval(&a, &x) * eval(&b, &x);
            let rhs: f64 = prod.iter().map(|(i, w)| w * eval(i, &x)).sum();
            assert!((lhs - rhs).abs() < 1e-13);
        }
    }
}
