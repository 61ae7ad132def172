//! Matrix-valued trigonometric polynomials on the circle.
//!
//! This is the coefficient ring of the whole calculus: finite Fourier sums
//! `Σ_{|k| ≤ M} c_k e^{ikx}` with `d × d` matrix coefficients. Storage is a
//! dense indexed sequence over `[-M, M]`; products convolve mode maps and may
//! grow the support up to a hard cap, beyond which they error rather than
//! silently truncate.

use serde::Serialize;

use crate::error::Error;
use crate::scalar::{Scalar, C64};
use crate::Result;

/// Default hard cap on the Fourier support of products.
pub const DEFAULT_HARD_CAP: usize = 64;

pub const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Small dense `d × d` matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mat<T> {
    pub d: usize,
    pub a: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(d: usize) -> Self {
        Mat { d, a: vec![T::zero(); d * d] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Mat::zeros(d);
        for i in 0..d {
            m.a[i * d + i] = T::one();
        }
        m
    }

    pub fn scalar(d: usize, z: T) -> Self {
        let mut m = Mat::zeros(d);
        for i in 0..d {
            m.a[i * d + i] = z;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.a[i * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.a[i * self.d + j] = v;
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let a = self.a.iter().zip(&rhs.a).map(|(x, y)| *x + *y).collect();
        Mat { d: self.d, a }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let a = self.a.iter().zip(&rhs.a).map(|(x, y)| *x - *y).collect();
        Mat { d: self.d, a }
    }

    pub fn scale(&self, z: T) -> Self {
        Mat { d: self.d, a: self.a.iter().map(|x| *x * z).collect() }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let d = self.d;
        let mut out = Mat::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let aik = self.get(i, k);
                if aik.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j) + aik * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        let d = self.d;
        let mut out = vec![T::zero(); d];
        for i in 0..d {
            let mut acc = T::zero();
            for j in 0..d {
                acc = acc + self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn conj(&self) -> Self {
        Mat { d: self.d, a: self.a.iter().map(|x| x.conj()).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|x| x.is_zero())
    }

    /// Determinant via elimination (small `d`).
    pub fn det(&self) -> T {
        let d = self.d;
        let mut m = self.a.clone();
        let mut det = T::one();
        for col in 0..d {
            // partial pivot by modulus of the value part
            let mut piv = col;
            for r in col + 1..d {
                if m[r * d + col].modulus() > m[piv * d + col].modulus() {
                    piv = r;
                }
            }
            if piv != col {
                for j in 0..d {
                    m.swap(col * d + j, piv * d + j);
                }
                det = -det;
            }
            let p = m[col * d + col];
            if p.modulus() == 0.0 {
                return T::zero();
            }
            det = det * p;
            for r in col + 1..d {
                let f = m[r * d + col] / p;
                for j in col..d {
                    let v = m[r * d + j] - f * m[col * d + j];
                    m[r * d + j] = v;
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.d;
        let mut m = self.a.clone();
        let mut inv = Mat::<T>::identity(d).a;
        for col in 0..d {
            let mut piv = col;
            for r in col + 1..d {
                if m[r * d + col].modulus() > m[piv * d + col].modulus() {
                    piv = r;
                }
            }
            if m[piv * d + col].modulus() < 1e-14 {
                return Err(Error::NotInvertible("singular matrix block".into()));
            }
            if piv != col {
                for j in 0..d {
                    m.swap(col * d + j, piv * d + j);
                    inv.swap(col * d + j, piv * d + j);
                }
            }
            let p = m[col * d + col];
            for j in 0..d {
                m[col * d + j] = m[col * d + j] / p;
                inv[col * d + j] = inv[col * d + j] / p;
            }
            for r in 0..d {
                if r == col {
                    continue;
                }
                let f = m[r * d + col];
                if f.is_zero() {
                    continue;
                }
                for j in 0..d {
                    m[r * d + j] = m[r * d + j] - f * m[col * d + j];
                    inv[r * d + j] = inv[r * d + j] - f * inv[col * d + j];
                }
            }
        }
        Ok(Mat { d, a: inv })
    }
}

/// Matrix-valued trigonometric polynomial `Σ_{|k| ≤ M} c_k e^{ikx}`.
///
/// `hard_cap` bounds the support growth of products; operations take the max
/// of the operands' caps, so one computation shares a single budget.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatTrigPoly<T> {
    pub dim: usize,
    pub mode_cap: usize,
    pub hard_cap: usize,
    /// Flagged when `coeff(-k) = conj(coeff(k))`, i.e. real-valued on `S^1`.
    pub real: bool,
    /// Dense over `[-M, M]`, index `k + M`.
    pub coeffs: Vec<Mat<T>>,
}

impl<T: Scalar> MatTrigPoly<T> {
    pub fn zeros(dim: usize, mode_cap: usize, hard_cap: usize) -> Self {
        MatTrigPoly {
            dim,
            mode_cap,
            hard_cap,
            real: true,
            coeffs: vec![Mat::zeros(dim); 2 * mode_cap + 1],
        }
    }

    /// Constant polynomial (mode 0 only).
    pub fn constant(m: Mat<T>, hard_cap: usize) -> Self {
        let dim = m.d;
        let real = m.a.iter().all(|x| (*x - x.conj()).modulus() == 0.0);
        MatTrigPoly { dim, mode_cap: 0, hard_cap, real, coeffs: vec![m] }
    }

    pub fn identity(dim: usize, hard_cap: usize) -> Self {
        Self::constant(Mat::identity(dim), hard_cap)
    }

    pub fn coeff(&self, k: i64) -> Mat<T> {
        if k.unsigned_abs() as usize > self.mode_cap {
            Mat::zeros(self.dim)
        } else {
            self.coeffs[(k + self.mode_cap as i64) as usize].clone()
        }
    }

    pub fn set_coeff(&mut self, k: i64, m: Mat<T>) {
        let idx = (k + self.mode_cap as i64) as usize;
        self.coeffs[idx] = m;
        self.real = false;
        self.recheck_real();
    }

    pub fn recheck_real(&mut self) {
        let m = self.mode_cap as i64;
        self.real = (0..=m).all(|k| {
            let a = self.coeff(k).conj();
            let b = self.coeff(-k);
            a.a.iter().zip(&b.a).all(|(x, y)| (*x - *y).modulus() == 0.0)
        });
    }

    /// Drop exactly-zero outer modes.
    pub fn trim(mut self) -> Self {
        let mut m = self.mode_cap;
        while m > 0 && self.coeff(m as i64).is_zero() && self.coeff(-(m as i64)).is_zero() {
            m -= 1;
        }
        if m < self.mode_cap {
            let old = self.mode_cap as i64;
            let coeffs = (-(m as i64)..=m as i64)
                .map(|k| self.coeffs[(k + old) as usize].clone())
                .collect();
            self.coeffs = coeffs;
            self.mode_cap = m;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Drop outer modes whose magnitude falls below `eps` — used to stop mode
    /// support from growing without bound through long composition chains
    /// whose coefficients decay geometrically.
    pub fn trim_below(mut self, eps: f64) -> Self {
        let mut m = self.mode_cap;
        while m > 0 && self.coeff(m as i64).max_abs() < eps && self.coeff(-(m as i64)).max_abs() < eps
        {
            m -= 1;
        }
        if m < self.mode_cap {
            let old = self.mode_cap as i64;
            let coeffs = (-(m as i64)..=m as i64)
                .map(|k| self.coeffs[(k + old) as usize].clone())
                .collect();
            self.coeffs = coeffs;
            self.mode_cap = m;
        }
        self
    }

    /// Hard mode-window truncation: keep only `|k| ≤ cap`.
    pub fn truncate_modes(mut self, cap: usize) -> Self {
        if cap < self.mode_cap {
            let old = self.mode_cap as i64;
            let coeffs = (-(cap as i64)..=cap as i64)
                .map(|k| self.coeffs[(k + old) as usize].clone())
                .collect();
            self.coeffs = coeffs;
            self.mode_cap = cap;
        }
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch(self.dim, rhs.dim));
        }
        let cap = self.mode_cap.max(rhs.mode_cap);
        let mut out = Self::zeros(self.dim, cap, self.hard_cap.max(rhs.hard_cap));
        for k in -(cap as i64)..=cap as i64 {
            let idx = (k + cap as i64) as usize;
            out.coeffs[idx] = self.coeff(k).add(&rhs.coeff(k));
        }
        out.real = self.real && rhs.real;
        Ok(out.trim())
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = c.scale(-T::one());
        }
        out
    }

    pub fn scale(&self, z: T) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = c.scale(z);
        }
        out.recheck_real();
        out
    }

    /// Mode-map convolution with non-commutative matrix products.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch(self.dim, rhs.dim));
        }
        let a = self.clone().trim();
        let b = rhs.clone().trim();
        let cap = a.mode_cap + b.mode_cap;
        let hard = a.hard_cap.max(b.hard_cap);
        if cap > hard {
            return Err(Error::ModeOverflow(cap, hard));
        }
        let mut out = Self::zeros(self.dim, cap, hard);
        for ka in -(a.mode_cap as i64)..=a.mode_cap as i64 {
            let ca = a.coeff(ka);
            if ca.is_zero() {
                continue;
            }
            for kb in -(b.mode_cap as i64)..=b.mode_cap as i64 {
                let cb = b.coeff(kb);
                if cb.is_zero() {
                    continue;
                }
                let idx = (ka + kb + cap as i64) as usize;
                out.coeffs[idx] = out.coeffs[idx].add(&ca.matmul(&cb));
            }
        }
        out.real = a.real && b.real;
        Ok(out.trim())
    }

    /// `d/dx`: mode `k` scaled by `ik`.
    pub fn derivative(&self) -> Self {
        let mut out = self.clone();
        let m = self.mode_cap as i64;
        for k in -m..=m {
            let idx = (k + m) as usize;
            out.coeffs[idx] = out.coeffs[idx].scale(T::i() * T::from_f64(k as f64));
        }
        out.real = self.real;
        out
    }

    /// Exact evaluation `Σ c_k e^{ikx}`.
    pub fn eval(&self, x: f64) -> Mat<T> {
        let m = self.mode_cap as i64;
        let mut out = Mat::zeros(self.dim);
        for k in -m..=m {
            let phase = T::from_c64(C64::from_polar(1.0, k as f64 * x));
            out = out.add(&self.coeff(k).scale(phase));
        }
        out
    }

    /// Pointwise inverse `x ↦ f(x)^{-1}`, sampled on a grid and refit to
    /// `refit_cap` modes. The inverse of a trigonometric polynomial is not a
    /// trigonometric polynomial, so the refit residual is returned alongside.
    pub fn pointwise_inverse(&self, refit_cap: usize, det_threshold: f64) -> Result<(Self, f64)> {
        let grid = grid_points(4 * self.mode_cap.max(refit_cap) + 1);
        for &x in &grid {
            let v = self.eval(x);
            if v.det().modulus() < det_threshold {
                return Err(Error::NotInvertible(format!(
                    "determinant magnitude below {det_threshold} at x = {x}"
                )));
            }
        }
        let samples: Vec<Mat<T>> =
            grid.iter().map(|&x| self.eval(x).inverse()).collect::<Result<_>>()?;
        let refit = refit_mat(&samples, self.dim, refit_cap, self.hard_cap);
        let residual = refit_residual_mat(&refit, &samples, &grid);
        Ok((refit, residual))
    }
}

impl MatTrigPoly<C64> {
    /// Scalar (d = 1) polynomial from a mode map `[(k, c_k)]`.
    pub fn scalar_modes(modes: &[(i64, C64)], hard_cap: usize) -> Self {
        let cap = modes.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut out = Self::zeros(1, cap, hard_cap);
        for &(k, c) in modes {
            let idx = (k + cap as i64) as usize;
            out.coeffs[idx].a[0] = out.coeffs[idx].a[0] + c;
        }
        out.recheck_real();
        out
    }

    /// `cos(kx)` as a scalar polynomial.
    pub fn cosine(k: i64, hard_cap: usize) -> Self {
        let half = C64::new(0.5, 0.0);
        Self::scalar_modes(&[(k, half), (-k, half)], hard_cap)
    }

    /// `sin(kx)` as a scalar polynomial.
    pub fn sine(k: i64, hard_cap: usize) -> Self {
        let half_i = C64::new(0.0, -0.5);
        Self::scalar_modes(&[(k, half_i), (-k, -half_i)], hard_cap)
    }
}

/// `V`-valued trigonometric polynomial (a column of `d` scalar polynomials).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrigVec<T> {
    pub dim: usize,
    pub mode_cap: usize,
    pub hard_cap: usize,
    /// Dense over `[-M, M]`, index `k + M`; each entry is a `d`-vector.
    pub coeffs: Vec<Vec<T>>,
}

impl<T: Scalar> TrigVec<T> {
    pub fn zeros(dim: usize, mode_cap: usize, hard_cap: usize) -> Self {
        TrigVec { dim, mode_cap, hard_cap, coeffs: vec![vec![T::zero(); dim]; 2 * mode_cap + 1] }
    }

    pub fn coeff(&self, k: i64) -> Vec<T> {
        if k.unsigned_abs() as usize > self.mode_cap {
            vec![T::zero(); self.dim]
        } else {
            self.coeffs[(k + self.mode_cap as i64) as usize].clone()
        }
    }

    pub fn set_coeff(&mut self, k: i64, v: Vec<T>) {
        let idx = (k + self.mode_cap as i64) as usize;
        self.coeffs[idx] = v;
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch(self.dim, rhs.dim));
        }
        let cap = self.mode_cap.max(rhs.mode_cap);
        let mut out = Self::zeros(self.dim, cap, self.hard_cap.max(rhs.hard_cap));
        for k in -(cap as i64)..=cap as i64 {
            let a = self.coeff(k);
            let b = rhs.coeff(k);
            let idx = (k + cap as i64) as usize;
            out.coeffs[idx] = a.iter().zip(&b).map(|(x, y)| *x + *y).collect();
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.scale(-T::one()))
    }

    pub fn scale(&self, z: T) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            for v in c.iter_mut() {
                *v = *v * z;
            }
        }
        out
    }

    pub fn derivative(&self) -> Self {
        let mut out = self.clone();
        let m = self.mode_cap as i64;
        for k in -m..=m {
            let f = T::i() * T::from_f64(k as f64);
            for v in out.coeffs[(k + m) as usize].iter_mut() {
                *v = *v * f;
            }
        }
        out
    }

    pub fn eval(&self, x: f64) -> Vec<T> {
        let m = self.mode_cap as i64;
        let mut out = vec![T::zero(); self.dim];
        for k in -m..=m {
            let phase = T::from_c64(C64::from_polar(1.0, k as f64 * x));
            for (o, c) in out.iter_mut().zip(&self.coeffs[(k + m) as usize]) {
                *o = *o + *c * phase;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .map(|x| x.modulus())
            .fold(0.0, f64::max)
    }

    /// Pointwise matrix-polynomial action (mode convolution).
    pub fn left_mul(&self, m: &MatTrigPoly<T>) -> Result<Self> {
        if self.dim != m.dim {
            return Err(Error::DimensionMismatch(m.dim, self.dim));
        }
        let cap = self.mode_cap + m.mode_cap;
        let hard = self.hard_cap.max(m.hard_cap);
        if cap > hard {
            return Err(Error::ModeOverflow(cap, hard));
        }
        let mut out = Self::zeros(self.dim, cap, hard);
        for ka in -(m.mode_cap as i64)..=m.mode_cap as i64 {
            let ca = m.coeff(ka);
            if ca.is_zero() {
                continue;
            }
            for kb in -(self.mode_cap as i64)..=self.mode_cap as i64 {
                let cb = self.coeff(kb);
                let idx = (ka + kb + cap as i64) as usize;
                let prod = ca.matvec(&cb);
                out.coeffs[idx] =
                    out.coeffs[idx].iter().zip(&prod).map(|(x, y)| *x + *y).collect();
            }
        }
        Ok(out)
    }

    pub fn basis(dim: usize, k: i64, j: usize, hard_cap: usize) -> Self {
        let mut out = Self::zeros(dim, k.unsigned_abs() as usize, hard_cap);
        let mut v = vec![T::zero(); dim];
        v[j] = T::one();
        out.set_coeff(k, v);
        out
    }
}

/// Uniform grid `x_j = 2πj/n` on `[0, 2π)`.
pub fn grid_points(n: usize) -> Vec<f64> {
    (0..n).map(|j| TAU * j as f64 / n as f64).collect()
}

/// DFT refit of matrix samples on a uniform grid to modes `|k| ≤ cap`.
pub fn refit_mat<T: Scalar>(
    samples: &[Mat<T>],
    dim: usize,
    cap: usize,
    hard_cap: usize,
) -> MatTrigPoly<T> {
    let n = samples.len();
    let mut out = MatTrigPoly::zeros(dim, cap, hard_cap);
    for k in -(cap as i64)..=cap as i64 {
        let mut acc = Mat::zeros(dim);
        for (j, s) in samples.iter().enumerate() {
            let phase = T::from_c64(C64::from_polar(1.0, -(k as f64) * TAU * j as f64 / n as f64));
            acc = acc.add(&s.scale(phase));
        }
        let idx = (k + cap as i64) as usize;
        out.coeffs[idx] = acc.scale(T::from_f64(1.0 / n as f64));
    }
    out.recheck_real();
    out
}

/// DFT refit of vector samples to modes `|k| ≤ cap`.
pub fn refit_vec<T: Scalar>(
    samples: &[Vec<T>],
    dim: usize,
    cap: usize,
    hard_cap: usize,
) -> TrigVec<T> {
    let n = samples.len();
    let mut out = TrigVec::zeros(dim, cap, hard_cap);
    for k in -(cap as i64)..=cap as i64 {
        let mut acc = vec![T::zero(); dim];
        for (j, s) in samples.iter().enumerate() {
            let phase = T::from_c64(C64::from_polar(1.0, -(k as f64) * TAU * j as f64 / n as f64));
            for (a, v) in acc.iter_mut().zip(s) {
                *a = *a + *v * phase;
            }
        }
        out.set_coeff(k, acc.iter().map(|v| *v * T::from_f64(1.0 / n as f64)).collect());
    }
    out
}

/// Max pointwise deviation of a refit from its samples.
pub fn refit_residual_mat<T: Scalar>(fit: &MatTrigPoly<T>, samples: &[Mat<T>], grid: &[f64]) -> f64 {
    grid.iter()
        .zip(samples)
        .map(|(&x, s)| fit.eval(x).sub(s).max_abs())
        .fold(0.0, f64::max)
}

pub fn refit_residual_vec<T: Scalar>(fit: &TrigVec<T>, samples: &[Vec<T>], grid: &[f64]) -> f64 {
    grid.iter()
        .zip(samples)
        .map(|(&x, s)| {
            fit.eval(x)
                .iter()
                .zip(s)
                .map(|(a, b)| (*a - *b).modulus())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
