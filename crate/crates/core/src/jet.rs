//! Truncated power series in the Taylor parameter `h` with complex
//! coefficients. Houses the `a_k` and `t_n` series of the Taylor bridge.

use serde::Serialize;

use crate::error::Error;
use crate::scalar::C64;
use crate::Result;

/// `c_0 + c_1 h + ... + c_N h^N`, arithmetic truncated at `h^N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HJetSeries {
    pub coeffs: Vec<C64>,
}

impl HJetSeries {
    pub fn zero(n: usize) -> Self {
        HJetSeries { coeffs: vec![C64::new(0.0, 0.0); n + 1] }
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, C64::new(1.0, 0.0))
    }

    pub fn constant(n: usize, c: C64) -> Self {
        let mut s = Self::zero(n);
        s.coeffs[0] = c;
        s
    }

    pub fn from_coeffs(coeffs: Vec<C64>) -> Self {
        HJetSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, j: usize) -> C64 {
        self.coeffs.get(j).copied().unwrap_or_else(|| C64::new(0.0, 0.0))
    }

    pub fn truncate(&self, n: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(n + 1, C64::new(0.0, 0.0));
        HJetSeries { coeffs: c }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.order().max(rhs.order());
        let mut out = Self::zero(n);
        for j in 0..=n {
            out.coeffs[j] = self.coeff(j) + rhs.coeff(j);
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, z: C64) -> Self {
        HJetSeries { coeffs: self.coeffs.iter().map(|c| c * z).collect() }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.order().max(rhs.order());
        let mut out = Self::zero(n);
        for i in 0..=self.order().min(n) {
            if self.coeffs[i].norm() == 0.0 {
                continue;
            }
            for j in 0..=rhs.order() {
                if i + j > n {
                    break;
                }
                out.coeffs[i + j] += self.coeffs[i] * rhs.coeffs[j];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Series logarithm; requires a nonzero constant term.
    pub fn log(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0.norm() < 1e-14 {
            return Err(Error::NonUnitConstantTerm);
        }
        let n = self.order();
        // log(c0) + log(1 + r), r = self/c0 - 1
        let r = self.scale(C64::new(1.0, 0.0) / c0).sub(&Self::one(n));
        let mut out = Self::constant(n, c0.ln());
        let mut pow = Self::one(n);
        for j in 1..=n {
            pow = pow.mul(&r);
            if pow.max_abs() == 0.0 {
                break;
            }
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            out = out.add(&pow.scale(C64::new(sign / j as f64, 0.0)));
        }
        Ok(out)
    }

    /// Series exponential.
    pub fn exp(&self) -> Self {
        let n = self.order();
        let c0 = self.coeffs[0];
        let r = self.sub(&Self::constant(n, c0));
        let mut out = Self::one(n);
        let mut pow = Self::one(n);
        let mut fact = 1.0;
        for j in 1..=n {
            pow = pow.mul(&r);
            if pow.max_abs() == 0.0 {
                break;
            }
            fact *= j as f64;
            out = out.add(&pow.scale(C64::new(1.0 / fact, 0.0)));
        }
        out.scale(c0.exp())
    }
}
