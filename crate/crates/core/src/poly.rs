//! Multivariate polynomials over `f64` in the monomial basis.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`], whose ordering is
//! graded lexicographic. No stored coefficient is ever exactly zero, so two
//! polynomials are equal iff their term maps are equal.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::SdeModel;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// Exponent tuple, one entry per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(dim: usize) -> Self {
        Monomial(vec![0; dim])
    }

    pub fn var(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Monomial(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All monomials in `dim` variables of total degree `<= max_degree`, in
    /// graded-lex order.
    pub fn all_up_to(dim: usize, max_degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        for deg in 0..=max_degree {
            let mut cur = vec![0u32; dim];
            push_compositions(&mut out, &mut cur, 0, deg);
        }
        out.sort();
        out
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(point)
            .map(|(&e, &x)| x.powi(e as i32))
            .product()
    }
}

fn push_compositions(out: &mut Vec<Monomial>, cur: &mut Vec<u32>, idx: usize, remaining: u32) {
    if cur.is_empty() {
        if remaining == 0 {
            out.push(Monomial(Vec::new()));
        }
        return;
    }
    if idx == cur.len() - 1 {
        cur[idx] = remaining;
        out.push(Monomial(cur.clone()));
        cur[idx] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[idx] = e;
        push_compositions(out, cur, idx + 1, remaining - e);
    }
    cur[idx] = 0;
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(Monomial::one(dim), c);
        p
    }

    /// The coordinate polynomial `x_i`.
    pub fn var(dim: usize, i: usize) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(Monomial::var(dim, i), 1.0);
        p
    }

    pub fn monomial(m: Monomial, c: f64) -> Self {
        let mut p = Self::zero(m.dim());
        p.add_term(m, c);
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging
    /// repeated monomials.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            if e.len() != dim {
                return Err(PolyError::DimensionMismatch {
                    left: dim,
                    right: e.len(),
                });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    /// Univariate helper: `coeffs[k]` multiplies `x^k`.
    pub fn univariate(coeffs: &[f64]) -> Self {
        let mut p = Self::zero(1);
        for (k, &c) in coeffs.iter().enumerate() {
            p.add_term(Monomial(vec![k as u32]), c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: f64) {
        assert_eq!(m.dim(), self.dim, "monomial dimension mismatch");
        if c == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    fn check_dim(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.dim != other.dim {
            Err(PolyError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_dim(other)?;
        let mut out = Polynomial::zero(self.dim);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = Polynomial::constant(self.dim, 1.0);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Partial derivative with respect to `x_i`.
    pub fn partial(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for (m, &c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut d = m.0.clone();
            d[i] -= 1;
            out.add_term(Monomial(d), c * e as f64);
        }
        out
    }

    pub fn grad(&self) -> Vec<Polynomial> {
        (0..self.dim).map(|i| self.partial(i)).collect()
    }

    /// Symmetric matrix of second partials, row-major.
    pub fn hessian(&self) -> Vec<Vec<Polynomial>> {
        let g = self.grad();
        let mut h = vec![vec![Polynomial::zero(self.dim); self.dim]; self.dim];
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = g[i].partial(j);
                h[j][i] = d.clone();
                h[i][j] = d;
            }
        }
        h
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.dim {
            return Err(PolyError::DimensionMismatch {
                left: self.dim,
                right: point.len(),
            });
        }
        Ok(self.eval(point))
    }

    /// Evaluation without the length check. Uses a per-variable power table,
    /// so each term costs one product per variable.
    pub fn eval(&self, point: &[f64]) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let max_e = self
            .terms
            .keys()
            .flat_map(|m| m.0.iter().copied())
            .max()
            .unwrap_or(0) as usize;
        let mut powers = vec![1.0; self.dim * (max_e + 1)];
        for (i, &x) in point.iter().enumerate().take(self.dim) {
            for k in 1..=max_e {
                powers[i * (max_e + 1) + k] = powers[i * (max_e + 1) + k - 1] * x;
            }
        }
        self.terms
            .iter()
            .map(|(m, &c)| {
                m.0.iter()
                    .enumerate()
                    .fold(c, |acc, (i, &e)| acc * powers[i * (max_e + 1) + e as usize])
            })
            .sum()
    }

    /// Substitutes `x_i = center[i] + scale[i] * y_i` and returns the
    /// polynomial in `y`.
    pub fn compose_affine(&self, center: &[f64], scale: &[f64]) -> Polynomial {
        assert_eq!(center.len(), self.dim);
        assert_eq!(scale.len(), self.dim);
        let max_e = self.degree();
        // powers[i][k] = (c_i + s_i y_i)^k
        let powers: Vec<Vec<Polynomial>> = (0..self.dim)
            .map(|i| {
                let lin = &Polynomial::constant(self.dim, center[i])
                    + &Polynomial::var(self.dim, i).scale(scale[i]);
                let mut v = vec![Polynomial::constant(self.dim, 1.0)];
                for k in 1..=max_e as usize {
                    let next = &v[k - 1] * &lin;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Polynomial::zero(self.dim);
        for (m, &c) in &self.terms {
            let mut t = Polynomial::constant(self.dim, c);
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = &t * &powers[i][e as usize];
                }
            }
            out = &out + &t;
        }
        out
    }

    /// Drops terms with `|c| < threshold`. Meant for display only.
    pub fn pruned(&self, threshold: f64) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() >= threshold)
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        }
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.try_add(rhs).expect("polynomial dimension mismatch")
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.try_sub(rhs).expect("polynomial dimension mismatch")
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.try_mul(rhs).expect("polynomial dimension mismatch")
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown = self.pruned(1e-12);
        if shown.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in shown.terms.iter().rev() {
            if first {
                if *c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if *c < 0.0 { "-" } else { "+" })?;
            }
            first = false;
            let a = c.abs();
            let vars: Vec<String> =
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| {
                        let name = if self.dim == 1 {
                            "x".to_string()
                        } else {
                            format!("x{}", i + 1)
                        };
                        if e == 1 {
                            name
                        } else {
                            format!("{name}^{e}")
                        }
                    })
                    .collect();
            if vars.is_empty() {
                write!(f, "{a}")?;
            } else if a == 1.0 {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{a}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// One `{exponents, coefficient}` record of the JSON polynomial encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub exponents: Vec<u32>,
    pub coefficient: f64,
}

impl Polynomial {
    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(m, &c)| TermRecord {
                exponents: m.0.clone(),
                coefficient: c,
            })
            .collect()
    }

    pub fn from_records(dim: usize, records: &[TermRecord]) -> Result<Self, PolyError> {
        Self::from_terms(
            dim,
            records.iter().map(|r| (r.exponents.clone(), r.coefficient)),
        )
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut records = self.to_records();
        // keep the dimension of the zero polynomial
        if records.is_empty() {
            records.push(TermRecord {
                exponents: vec![0; self.dim],
                coefficient: 0.0,
            });
        }
        records.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let records = Vec::<TermRecord>::deserialize(d)?;
        let Some(first) = records.first() else {
            return Err(serde::de::Error::custom(
                "polynomial needs at least one term record",
            ));
        };
        Polynomial::from_records(first.exponents.len(), &records).map_err(serde::de::Error::custom)
    }
}

/// Precomputed pieces of the Itô generator
/// `Lv = grad(v) . f + 1/2 Tr(sigma^T H_v sigma)`.
///
/// The trace term is evaluated through `a = sigma sigma^T`, since
/// `Tr(sigma^T H sigma) = sum_ij H_ij a_ij`.
#[derive(Debug, Clone)]
pub struct Generator {
    drift: Vec<Polynomial>,
    diffusion_outer: Vec<Vec<Polynomial>>,
}

impl Generator {
    pub fn new(model: &SdeModel) -> Self {
        let n = model.dimension();
        let m = model.brownian_dim();
        let sigma = model.diffusion();
        let mut a = vec![vec![Polynomial::zero(n); n]; n];
        for i in 0..n {
            for j in i..n {
                let mut s = Polynomial::zero(n);
                for k in 0..m {
                    s = &s + &(&sigma[i][k] * &sigma[j][k]);
                }
                a[j][i] = s.clone();
                a[i][j] = s;
            }
        }
        Generator {
            drift: model.drift().to_vec(),
            diffusion_outer: a,
        }
    }

    pub fn dimension(&self) -> usize {
        self.drift.len()
    }

    pub fn apply(&self, v: &Polynomial) -> Result<Polynomial, PolyError> {
        let n = self.dimension();
        if v.dim() != n {
            return Err(PolyError::DimensionMismatch {
                left: n,
                right: v.dim(),
            });
        }
        let mut out = Polynomial::zero(n);
        for i in 0..n {
            let di = v.partial(i);
            if di.is_zero() {
                continue;
            }
            out = &out + &(&di * &self.drift[i]);
            for j in 0..n {
                let dij = di.partial(j);
                if dij.is_zero() || self.diffusion_outer[i][j].is_zero() {
                    continue;
                }
                out = &out + &(&dij * &self.diffusion_outer[i][j]).scale(0.5);
            }
        }
        Ok(out)
    }
}

/// `Lv` for the SDE `model`.
pub fn generator(v: &Polynomial, model: &SdeModel) -> Result<Polynomial, PolyError> {
    Generator::new(model).apply(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Polynomial {
        Polynomial::var(1, 0)
    }

    #[test]
    fn add_cancels_to_empty() {
        let p = x().pow(2);
        let s = &p + &(-&p);
        assert!(s.is_zero());
        assert_eq!(s.n_terms(), 0);
    }

    #[test]
    fn add_merges_like_terms() {
        let s = &x().scale(2.0) + &x().scale(3.0);
        assert_eq!(s, x().scale(5.0));
        let p = Polynomial::univariate(&[0.0, -5.0, 0.0, 15.0]);
        assert_eq!(&p + &x(), Polynomial::univariate(&[0.0, -4.0, 0.0, 15.0]));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = Polynomial::var(1, 0);
        let b = Polynomial::var(2, 1);
        assert_eq!(
            a.try_add(&b),
            Err(PolyError::DimensionMismatch { left: 1, right: 2 })
        );
        assert!(a.try_mul(&b).is_err());
        assert!(a.evaluate(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn mul_expands_interval_product() {
        assert_eq!(&x() * &x(), x().pow(2));
        let one = Polynomial::constant(1, 1.0);
        let p = Polynomial::univariate(&[1.0, 2.0, 3.0]);
        assert_eq!(&one * &p, p);
        let b_minus_x = Polynomial::univariate(&[0.5, -1.0]);
        let x_minus_a = Polynomial::univariate(&[-0.1, 1.0]);
        let prod = &b_minus_x * &x_minus_a;
        let expect = [-0.05, 0.6, -1.0];
        for (k, e) in expect.iter().enumerate() {
            let c = prod.coefficient(&Monomial::new(vec![k as u32]));
            assert!((c - e).abs() < 1e-15, "{k}: {c}");
        }
        assert_eq!(prod.degree(), 2);
    }

    #[test]
    fn grad_and_hessian() {
        assert!(Polynomial::constant(2, 3.0)
            .grad()
            .iter()
            .all(|g| g.is_zero()));
        assert_eq!(x().pow(2).grad(), vec![x().scale(2.0)]);
        let p = Polynomial::from_terms(2, [(vec![2, 1], 1.0)]).unwrap();
        let g = p.grad();
        assert_eq!(
            g[0],
            Polynomial::from_terms(2, [(vec![1, 1], 2.0)]).unwrap()
        );
        assert_eq!(
            g[1],
            Polynomial::from_terms(2, [(vec![2, 0], 1.0)]).unwrap()
        );
        let h = p.hessian();
        assert_eq!(
            h[0][0],
            Polynomial::from_terms(2, [(vec![0, 1], 2.0)]).unwrap()
        );
        assert_eq!(
            h[0][1],
            Polynomial::from_terms(2, [(vec![1, 0], 2.0)]).unwrap()
        );
        assert_eq!(h[1][0], h[0][1]);
        assert!(h[1][1].is_zero());
        let lin = Polynomial::from_terms(2, [(vec![1, 0], 3.0), (vec![0, 1], -1.0)]).unwrap();
        assert!(lin.hessian().iter().flatten().all(|e| e.is_zero()));
        assert_eq!(x().pow(2).hessian()[0][0], Polynomial::constant(1, 2.0));
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(Polynomial::zero(1).evaluate(&[0.3]).unwrap(), 0.0);
        assert_eq!(x().pow(2).evaluate(&[0.5]).unwrap(), 0.25);
        let p = Polynomial::univariate(&[0.0, -5.0, 0.0, 15.0]);
        assert!((p.evaluate(&[0.5]).unwrap() + 0.625).abs() < 1e-15);
    }

    #[test]
    fn graded_lex_order() {
        let ms = Monomial::all_up_to(2, 2);
        let e: Vec<Vec<u32>> = ms.iter().map(|m| m.exponents().to_vec()).collect();
        assert_eq!(
            e,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![1, 0],
                vec![0, 2],
                vec![1, 1],
                vec![2, 0]
            ]
        );
        assert_eq!(Monomial::all_up_to(3, 4).len(), 35);
    }

    #[test]
    fn compose_affine_matches_pointwise() {
        let p = Polynomial::from_terms(
            2,
            [(vec![3, 1], 2.0), (vec![0, 2], -1.0), (vec![0, 0], 0.5)],
        )
        .unwrap();
        let c = [0.3, -1.0];
        let s = [2.0, 0.5];
        let q = p.compose_affine(&c, &s);
        for &(y1, y2) in &[(0.1, 0.2), (-0.7, 0.9), (1.0, -1.0)] {
            let xv = [c[0] + s[0] * y1, c[1] + s[1] * y2];
            assert!((q.eval(&[y1, y2]) - p.eval(&xv)).abs() < 1e-12);
        }
    }

    #[test]
    fn display_prunes_tiny_terms() {
        let p = Polynomial::univariate(&[1e-14, -5.0, 0.0, 15.0]);
        assert_eq!(p.to_string(), "15*x^3 - 5*x");
    }

    #[test]
    fn json_records_round_trip() {
        let p = Polynomial::from_terms(2, [(vec![1, 2], 0.25), (vec![0, 0], -3.0)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let records: Vec<TermRecord> = serde_json::from_str(&s).unwrap();
        assert_eq!(p, Polynomial::from_records(2, &records).unwrap());
    }
}
