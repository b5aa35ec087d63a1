//! Small dense determinants.
//!
//! Cayley–Menger matrices are at most 8×8, so plain Gaussian elimination with
//! partial pivoting is enough. The precise path carries every intermediate in
//! double-double arithmetic (about 32 significant digits), which keeps the
//! heavy cancellation at embeddable configurations from swamping the
//! residuals. The fast path is ordinary `f64` and is used for root scanning.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub(crate) const MAX_DIM: usize = 8;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Self::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Self::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }
}

/// Determinant of the leading `n×n` block of `a`, in double-double precision.
pub(crate) fn det_precise(n: usize, a: &[[f64; MAX_DIM]; MAX_DIM]) -> f64 {
    debug_assert!(n <= MAX_DIM);
    let mut m = [[DoubleDouble::ZERO; MAX_DIM]; MAX_DIM];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = DoubleDouble::from_f64(a[i][j]);
        }
    }
    let mut det = DoubleDouble::from_f64(1.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().hi.total_cmp(&m[y][col].abs().hi))
            .unwrap_or(col);
        if m[pivot][col].hi == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col];
        det = det * p;
        for row in col + 1..n {
            let factor = m[row][col] / p;
            if factor.hi == 0.0 {
                continue;
            }
            for k in col + 1..n {
                m[row][k] = m[row][k] - factor * m[col][k];
            }
        }
    }
    det.to_f64()
}

/// Determinant of the leading `n×n` block of `a`, in plain `f64`.
pub(crate) fn det_fast(n: usize, a: &[[f64; MAX_DIM]; MAX_DIM]) -> f64 {
    let mut m = *a;
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap_or(col);
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for row in col + 1..n {
            let factor = m[row][col] / p;
            for k in col + 1..n {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    det
}
