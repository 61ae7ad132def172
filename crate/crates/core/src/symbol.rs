//! Truncated formal odd-class pseudo-differential symbols on the circle.
//!
//! A symbol is a finite sum `Σ_n γ_n(x) ∂^n` with orders `n ∈ [-K, m]` and
//! trigonometric-polynomial coefficients; the odd-class condition is enforced
//! representationally by this canonical form. Composition is the standard
//! one-variable rule `∂^n ∘ γ = Σ_{k ≥ 0} C(n,k) γ^{(k)} ∂^{n-k}` with
//! generalized binomials, truncated below the floor `-K`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::Error;
use crate::scalar::{Scalar, C64};
use crate::trig::{Mat, MatTrigPoly, TrigVec};
use crate::Result;

/// Generalized binomial `C(n, k) = n(n-1)...(n-k+1)/k!` for integer `n`.
pub fn gen_binomial(n: i64, k: u32) -> f64 {
    let mut num = 1.0;
    for j in 0..k as i64 {
        num *= (n - j) as f64;
    }
    let mut den = 1.0;
    for j in 1..=k as i64 {
        den *= j as f64;
    }
    num / den
}

/// Truncated odd-class classical symbol `Σ_{n ∈ [-K, m]} γ_n(x) ∂^n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Symbol<T> {
    pub dim: usize,
    /// Truncation floor `-K` (inclusive lowest stored order).
    pub floor: i64,
    pub hard_cap: usize,
    /// Order `n` to coefficient `γ_n`; absent orders are zero.
    pub comps: BTreeMap<i64, MatTrigPoly<T>>,
}

/// The direct-sum split of a symbol into differential (orders ≥ 0) and
/// integral (orders ≤ -1) parts.
#[derive(Clone, Debug)]
pub struct SymbolSplit<T> {
    pub d_part: Symbol<T>,
    pub s_part: Symbol<T>,
}

impl<T: Scalar> Symbol<T> {
    pub fn zero(dim: usize, floor: i64, hard_cap: usize) -> Self {
        assert!(floor <= 0);
        Symbol { dim, floor, hard_cap, comps: BTreeMap::new() }
    }

    pub fn identity(dim: usize, floor: i64, hard_cap: usize) -> Self {
        let mut s = Self::zero(dim, floor, hard_cap);
        s.comps.insert(0, MatTrigPoly::identity(dim, hard_cap));
        s
    }

    /// The differentiation operator `∂`.
    pub fn dx(dim: usize, floor: i64, hard_cap: usize) -> Self {
        let mut s = Self::zero(dim, floor, hard_cap);
        s.comps.insert(1, MatTrigPoly::identity(dim, hard_cap));
        s
    }

    /// Multiplication operator (order-0 coefficient).
    pub fn mul_op(gamma: MatTrigPoly<T>, floor: i64) -> Self {
        let mut s = Self::zero(gamma.dim, floor, gamma.hard_cap);
        if !gamma.is_zero() {
            s.comps.insert(0, gamma);
        }
        s
    }

    /// Single component `γ ∂^n`.
    pub fn monomial(n: i64, gamma: MatTrigPoly<T>, floor: i64) -> Self {
        let mut s = Self::zero(gamma.dim, floor, gamma.hard_cap);
        if n >= floor && !gamma.is_zero() {
            s.comps.insert(n, gamma);
        }
        s
    }

    pub fn comp(&self, n: i64) -> MatTrigPoly<T> {
        self.comps.get(&n).cloned().unwrap_or_else(|| MatTrigPoly::zeros(self.dim, 0, self.hard_cap))
    }

    pub fn set_comp(&mut self, n: i64, gamma: MatTrigPoly<T>) {
        if n < self.floor {
            return;
        }
        if gamma.is_zero() {
            self.comps.remove(&n);
        } else {
            self.comps.insert(n, gamma);
        }
    }

    /// Re-truncate to a different floor. Deepening pads with (implicit)
    /// zeros; shallowing drops components below the new floor.
    pub fn with_floor(&self, floor: i64) -> Self {
        let mut out = self.clone();
        out.floor = floor;
        out.comps.retain(|&n, _| n >= floor);
        out
    }

    /// Drop mode tails below `eps` relative to the symbol's magnitude.
    pub fn trim_small(&self, eps: f64) -> Self {
        let cut = eps * self.max_abs();
        let mut out = self.clone();
        out.comps.retain(|_, g| {
            *g = g.clone().trim_below(cut);
            !g.is_zero()
        });
        out
    }

    /// Hard mode-window truncation of every coefficient to `|k| ≤ cap`.
    pub fn clamp_modes(&self, cap: usize) -> Self {
        let mut out = self.clone();
        for g in out.comps.values_mut() {
            *g = g.clone().truncate_modes(cap);
        }
        out
    }

    /// Highest order carrying a nonzero coefficient.
    pub fn top_order(&self) -> Option<i64> {
        self.comps.iter().rev().find(|(_, g)| !g.is_zero()).map(|(n, _)| *n)
    }

    pub fn is_zero(&self) -> bool {
        self.comps.values().all(|g| g.is_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.values().map(|g| g.max_abs()).fold(0.0, f64::max)
    }

    fn check_compat(&self, rhs: &Self) -> Result<()> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch(self.dim, rhs.dim));
        }
        if self.floor != rhs.floor {
            return Err(Error::FloorMismatch(-self.floor, -rhs.floor));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_compat(rhs)?;
        let mut out = self.clone();
        out.hard_cap = self.hard_cap.max(rhs.hard_cap);
        for (n, g) in &rhs.comps {
            let cur = out.comp(*n);
            out.set_comp(*n, cur.add(g)?);
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for g in out.comps.values_mut() {
            *g = g.neg();
        }
        out
    }

    pub fn scale(&self, z: T) -> Self {
        let mut out = self.clone();
        for g in out.comps.values_mut() {
            *g = g.scale(z);
        }
        out
    }

    /// Coefficientwise `d/dx`.
    pub fn dx_coeffs(&self) -> Self {
        let mut out = self.clone();
        for g in out.comps.values_mut() {
            *g = g.derivative();
        }
        out
    }

    /// Operator composition, truncated below the floor.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        self.check_compat(rhs)?;
        let mut out = Self::zero(self.dim, self.floor, self.hard_cap.max(rhs.hard_cap));
        for (&m, gamma) in &self.comps {
            if gamma.is_zero() {
                continue;
            }
            for (&n, delta) in &rhs.comps {
                if delta.is_zero() {
                    continue;
                }
                // ∂^m ∘ δ ∂^n = Σ_k C(m,k) δ^{(k)} ∂^{m+n-k}
                let mut dk = delta.clone();
                let mut k: u32 = 0;
                loop {
                    let order = m + n - k as i64;
                    if order < self.floor {
                        break;
                    }
                    let c = gen_binomial(m, k);
                    if c != 0.0 {
                        let term = gamma.mul(&dk.scale(T::from_f64(c)))?;
                        let cur = out.comp(order);
                        out.set_comp(order, cur.add(&term)?);
                    } else if m >= 0 && k as i64 > m {
                        break;
                    }
                    if dk.is_zero() {
                        break;
                    }
                    dk = dk.derivative();
                    k += 1;
                }
            }
        }
        Ok(out)
    }

    /// Split into orders ≥ 0 (differential part) and orders ≤ -1.
    pub fn split_ds(&self) -> SymbolSplit<T> {
        let mut d_part = Self::zero(self.dim, self.floor, self.hard_cap);
        let mut s_part = Self::zero(self.dim, self.floor, self.hard_cap);
        for (&n, g) in &self.comps {
            if n >= 0 {
                d_part.set_comp(n, g.clone());
            } else {
                s_part.set_comp(n, g.clone());
            }
        }
        SymbolSplit { d_part, s_part }
    }

    pub fn d_part(&self) -> Self {
        self.split_ds().d_part
    }

    pub fn s_part(&self) -> Self {
        self.split_ds().s_part
    }

    /// Highest nonzero order and its coefficient.
    pub fn principal(&self) -> Result<(i64, MatTrigPoly<T>)> {
        let n = self.top_order().ok_or(Error::ZeroSymbol)?;
        Ok((n, self.comp(n)))
    }

    /// Inverse of an order-0 symbol, computed by a terminating Neumann series
    /// after factoring out the pointwise-invertible order-0 coefficient.
    pub fn invert(&self) -> Result<Self> {
        match self.top_order() {
            Some(0) => {}
            other => {
                return Err(Error::NotInvertible(format!(
                    "top order must be 0, found {other:?}"
                )))
            }
        }
        let gamma0 = self.comp(0);
        let g0_inv = if gamma0.mode_cap == 0 {
            MatTrigPoly::constant(gamma0.coeff(0).inverse()?, gamma0.hard_cap)
        } else {
            let refit_cap = (12 * gamma0.mode_cap).max(24).min((self.hard_cap / 2).max(1));
            let (inv, _res) = gamma0.pointwise_inverse(refit_cap, 1e-8)?;
            inv
        };
        let m_inv = Self::mul_op(g0_inv, self.floor);
        let rest = self.sub(&Self::mul_op(gamma0, self.floor))?;
        // A = M_{γ0} (1 + Q), Q = M_{γ0}^{-1} R of order ≤ -1; the refit
        // inverse has geometrically decaying modes, so trim the tails to
        // keep convolution support bounded through the Neumann powers
        // clamp supports to half the hard cap so Neumann powers cannot
        // overflow it; the clamped tail sits at the geometric decay floor
        let window = (self.hard_cap / 2).max(1);
        let q = m_inv.compose(&rest)?.trim_small(1e-15).clamp_modes(window);
        let mut series = Self::identity(self.dim, self.floor, self.hard_cap);
        let mut pow = Self::identity(self.dim, self.floor, self.hard_cap);
        let k_budget = (-self.floor) as usize;
        for j in 1..=k_budget + 1 {
            pow = pow.compose(&q)?.neg().trim_small(1e-15).clamp_modes(window);
            if pow.is_zero() {
                break;
            }
            let _ = j;
            series = series.add(&pow)?;
        }
        Ok(series.compose(&m_inv)?.trim_small(1e-15))
    }

    /// Terminating exponential of a symbol of top order ≤ -1.
    pub fn exp_neg(&self) -> Result<Self> {
        if let Some(t) = self.top_order() {
            if t > -1 {
                return Err(Error::OrderTooHigh(t));
            }
        }
        let mut out = Self::identity(self.dim, self.floor, self.hard_cap);
        let mut pow = Self::identity(self.dim, self.floor, self.hard_cap);
        let mut fact = 1.0;
        for j in 1..=(-self.floor) as usize + 1 {
            pow = pow.compose(self)?;
            if pow.is_zero() {
                break;
            }
            fact *= j as f64;
            out = out.add(&pow.scale(T::from_f64(1.0 / fact)))?;
        }
        Ok(out)
    }

    /// Terminating logarithm of `1 + (top order ≤ -1)`.
    pub fn log_neg(&self) -> Result<Self> {
        let r = self.sub(&Self::identity(self.dim, self.floor, self.hard_cap))?;
        if let Some(t) = r.top_order() {
            if t > -1 {
                return Err(Error::OrderTooHigh(t));
            }
        }
        let mut out = Self::zero(self.dim, self.floor, self.hard_cap);
        let mut pow = Self::identity(self.dim, self.floor, self.hard_cap);
        for j in 1..=(-self.floor) as usize + 1 {
            pow = pow.compose(&r)?;
            if pow.is_zero() {
                break;
            }
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            out = out.add(&pow.scale(T::from_f64(sign / j as f64)))?;
        }
        Ok(out)
    }

    /// Fourier-multiplier action `(Af)(x) = Σ_k Σ_n γ_n(x)(ik)^n f_k e^{ikx}`,
    /// with the zero-mode convention `(ik)^n |_{k=0} = 0` for `n < 0`.
    pub fn apply(&self, f: &TrigVec<T>) -> Result<TrigVec<T>> {
        if self.dim != f.dim {
            return Err(Error::DimensionMismatch(self.dim, f.dim));
        }
        let mut out = TrigVec::zeros(self.dim, f.mode_cap, self.hard_cap.max(f.hard_cap));
        for (&n, gamma) in &self.comps {
            if gamma.is_zero() {
                continue;
            }
            // weight f by the multiplier (ik)^n, then multiply by γ_n(x)
            let mut weighted = f.clone();
            let m = f.mode_cap as i64;
            for k in -m..=m {
                let w = multiplier(k, n);
                let idx = (k + m) as usize;
                for v in weighted.coeffs[idx].iter_mut() {
                    *v = *v * T::from_c64(w);
                }
            }
            out = out.add(&weighted.left_mul(gamma)?)?;
        }
        Ok(out)
    }

    /// Map every coefficient scalar, e.g. lifting to jets.
    pub fn map_scalars<U: Scalar>(&self, f: &impl Fn(T) -> U) -> Symbol<U> {
        let comps = self
            .comps
            .iter()
            .map(|(&n, g)| {
                let coeffs =
                    g.coeffs.iter().map(|m| Mat { d: m.d, a: m.a.iter().map(|x| f(*x)).collect() }).collect();
                (
                    n,
                    MatTrigPoly {
                        dim: g.dim,
                        mode_cap: g.mode_cap,
                        hard_cap: g.hard_cap,
                        real: false,
                        coeffs,
                    },
                )
            })
            .collect();
        Symbol { dim: self.dim, floor: self.floor, hard_cap: self.hard_cap, comps }
    }
}

/// `(ik)^n` with the zero-mode convention.
pub fn multiplier(k: i64, n: i64) -> C64 {
    let ik = C64::new(0.0, k as f64);
    if n == 0 {
        C64::new(1.0, 0.0)
    } else if n > 0 {
        ik.powi(n as i32)
    } else if k == 0 {
        C64::new(0.0, 0.0)
    } else {
        C64::new(1.0, 0.0) / ik.powi((-n) as i32)
    }
}

impl<T: Scalar> fmt::Display for Symbol<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (&n, g) in self.comps.iter().rev() {
            if g.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "γ₀(x)")?,
                1 => write!(f, "γ₁(x)·∂")?,
                _ => write!(f, "γ_{{{n}}}(x)·∂^{{{n}}}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
