//! Double-double arithmetic and the few dense kernels the interior-point
//! direction needs. Roughly 32 significant digits from pairs of `f64`.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::new(self.hi.max(0.0).sqrt());
        }
        let x = self.hi.sqrt();
        let y = Dd::new(x);
        y + Dd::new((self - y * y).hi / (2.0 * x))
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * b.lo + self.lo * b.hi));
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// Dense row-major matrix of [`Dd`].
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DdMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Dd>,
}

impl DdMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DdMat {
            rows,
            cols,
            data: vec![Dd::ZERO; rows * cols],
        }
    }

    pub fn from_f64(m: &nalgebra::DMatrix<f64>) -> Self {
        let mut out = DdMat::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.data[i * m.ncols() + j] = Dd::new(m[(i, j)]);
            }
        }
        out
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.at(i, j).to_f64())
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Dd {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Dd {
        &mut self.data[i * self.cols + j]
    }

    pub fn matmul(&self, b: &DdMat) -> DdMat {
        let mut out = DdMat::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.hi == 0.0 {
                    continue;
                }
                for j in 0..b.cols {
                    let v = out.at(i, j) + a * b.at(k, j);
                    *out.at_mut(i, j) = v;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> DdMat {
        let mut out = DdMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(j, i) = self.at(i, j);
            }
        }
        out
    }

    pub fn add_scaled(&mut self, b: &DdMat, s: Dd) {
        for (x, y) in self.data.iter_mut().zip(&b.data) {
            *x = *x + *y * s;
        }
    }

    /// `(A + A^T) / 2`.
    pub fn symmetrized(&self) -> DdMat {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..i {
                let v = (self.at(i, j) + self.at(j, i)) * 0.5;
                *out.at_mut(i, j) = v;
                *out.at_mut(j, i) = v;
            }
        }
        out
    }

    /// Inverse of a symmetric positive definite matrix through its Cholesky
    /// factor; `None` if the matrix is not numerically definite.
    pub fn spd_inverse(&self) -> Option<DdMat> {
        let n = self.rows;
        let mut l = DdMat::zeros(n, n);
        for j in 0..n {
            let mut d = self.at(j, j);
            for k in 0..j {
                d = d - l.at(j, k) * l.at(j, k);
            }
            if !(d.hi > 0.0) {
                return None;
            }
            let djj = d.sqrt();
            *l.at_mut(j, j) = djj;
            for i in j + 1..n {
                let mut s = self.at(i, j);
                for k in 0..j {
                    s = s - l.at(i, k) * l.at(j, k);
                }
                *l.at_mut(i, j) = s / djj;
            }
        }
        // W = L^{-1}
        let mut w = DdMat::zeros(n, n);
        for j in 0..n {
            for i in j..n {
                let mut s = if i == j { Dd::new(1.0) } else { Dd::ZERO };
                for k in j..i {
                    s = s - l.at(i, k) * w.at(k, j);
                }
                *w.at_mut(i, j) = s / l.at(i, i);
            }
        }
        Some(w.transpose().matmul(&w))
    }
}

/// LU factorization with partial pivoting.
pub(crate) struct DdLu {
    lu: DdMat,
    perm: Vec<usize>,
}

impl DdLu {
    pub fn new(mut a: DdMat) -> Option<DdLu> {
        let n = a.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, a.at(i, k).abs().hi))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(best > 0.0) {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a.at(k, k);
            for i in k + 1..n {
                let f = a.at(i, k) / pivot;
                *a.at_mut(i, k) = f;
                if f.hi == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let v = a.at(i, j) - f * a.at(k, j);
                    *a.at_mut(i, j) = v;
                }
            }
        }
        Some(DdLu { lu: a, perm })
    }

    pub fn solve(&self, b: &[Dd]) -> Vec<Dd> {
        let n = self.lu.rows;
        let mut x: Vec<Dd> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s = s - self.lu.at(i, k) * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s = s - self.lu.at(i, k) * x[k];
            }
            x[i] = s / self.lu.at(i, i);
        }
        x
    }
}
