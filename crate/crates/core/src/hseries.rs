//! The truncated graded algebra of h-series of symbols and its
//! Birkhoff-Mulase factorization.
//!
//! An element is `Σ_{n ≤ N} a_n h^n` with each `a_n` a symbol subject to the
//! growth condition `ord(a_n) ≤ n`. Units additionally have an invertible
//! order-0 term `a_0`. The factorization writes a unit `U` uniquely as
//! `U = S^{-1} Y` with `S - 1` purely of negative order and every
//! h-coefficient of `Y` a differential operator.

use serde::Serialize;

use crate::error::Error;
use crate::scalar::Scalar;
use crate::symbol::Symbol;
use crate::Result;

/// Truncated h-series `a_0 + a_1 h + ... + a_N h^N` of symbols.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HSeries<T> {
    pub h_order: usize,
    pub terms: Vec<Symbol<T>>,
}

/// Result of the Birkhoff-Mulase factorization `U = S^{-1} Y`.
///
/// The factors are carried at a floor deepened below the input's: truncated
/// composition is not associative at the floor when positive orders are in
/// play (dropped sub-floor terms get raised back by `∂^n`), so the recursion
/// runs with a margin of the input's largest positive order and only the
/// reported window down to `nominal_floor` is exact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HFactorization<T> {
    pub s_factor: HSeries<T>,
    pub y_factor: HSeries<T>,
    /// Floor of the factorized input; orders below it are working margin.
    pub nominal_floor: i64,
}

/// Growth-condition audit outcome.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub ok: bool,
    /// First `(n, ord(a_n))` violating `ord(a_n) ≤ n`, if any.
    pub first_violation: Option<(usize, i64)>,
}

impl<T: Scalar> HSeries<T> {
    pub fn zero(h_order: usize, dim: usize, floor: i64, hard_cap: usize) -> Self {
        HSeries {
            h_order,
            terms: (0..=h_order).map(|_| Symbol::zero(dim, floor, hard_cap)).collect(),
        }
    }

    pub fn one(h_order: usize, dim: usize, floor: i64, hard_cap: usize) -> Self {
        let mut s = Self::zero(h_order, dim, floor, hard_cap);
        s.terms[0] = Symbol::identity(dim, floor, hard_cap);
        s
    }

    /// Series with a single coefficient `a` at `h^n`.
    pub fn monomial(h_order: usize, n: usize, a: Symbol<T>) -> Self {
        let mut s = Self::zero(h_order, a.dim, a.floor, a.hard_cap);
        if n <= h_order {
            s.terms[n] = a;
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.terms[0].dim
    }

    pub fn floor(&self) -> i64 {
        self.terms[0].floor
    }

    pub fn hard_cap(&self) -> usize {
        self.terms[0].hard_cap
    }

    pub fn term(&self, n: usize) -> &Symbol<T> {
        &self.terms[n]
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.is_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.iter().map(|t| t.max_abs()).fold(0.0, f64::max)
    }

    fn check_compat(&self, rhs: &Self) -> Result<()> {
        if self.h_order != rhs.h_order {
            return Err(Error::HOrderMismatch(self.h_order, rhs.h_order));
        }
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch(self.dim(), rhs.dim()));
        }
        if self.floor() != rhs.floor() {
            return Err(Error::FloorMismatch(-self.floor(), -rhs.floor()));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_compat(rhs)?;
        let terms = self
            .terms
            .iter()
            .zip(&rhs.terms)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(HSeries { h_order: self.h_order, terms })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        HSeries { h_order: self.h_order, terms: self.terms.iter().map(|t| t.neg()).collect() }
    }

    pub fn scale(&self, z: T) -> Self {
        HSeries { h_order: self.h_order, terms: self.terms.iter().map(|t| t.scale(z)).collect() }
    }

    /// Multiply by `h^k` (shift the grading up, dropping overflow).
    pub fn hshift(&self, k: usize) -> Self {
        let mut out = Self::zero(self.h_order, self.dim(), self.floor(), self.hard_cap());
        for n in 0..=self.h_order {
            if n + k <= self.h_order {
                out.terms[n + k] = self.terms[n].clone();
            }
        }
        out
    }

    /// Cauchy product `c_n = Σ_{i+j=n} a_i ∘ b_j`.
    pub fn hmul(&self, rhs: &Self) -> Result<Self> {
        self.check_compat(rhs)?;
        let mut out = Self::zero(self.h_order, self.dim(), self.floor(), self.hard_cap());
        for n in 0..=self.h_order {
            let mut acc = Symbol::zero(self.dim(), self.floor(), self.hard_cap());
            for i in 0..=n {
                let (a, b) = (&self.terms[i], &rhs.terms[n - i]);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc = acc.add(&a.compose(b)?)?;
            }
            out.terms[n] = acc;
        }
        Ok(out)
    }

    /// Unit-membership check: `a_0` of top order 0 with split d-part only? A
    /// unit needs `a_0` invertible at order 0.
    pub fn is_unit(&self) -> bool {
        matches!(self.terms[0].top_order(), Some(0))
    }

    /// Inverse of a unit: `b_0 = a_0^{-1}`, `b_n = -a_0^{-1} Σ_{i≥1} a_i b_{n-i}`.
    pub fn hinv(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NotAUnit("h^0 term must have top order 0".into()));
        }
        let b0 = self.terms[0].invert()?;
        let mut out = Self::zero(self.h_order, self.dim(), self.floor(), self.hard_cap());
        out.terms[0] = b0.clone();
        for n in 1..=self.h_order {
            let mut acc = Symbol::zero(self.dim(), self.floor(), self.hard_cap());
            for i in 1..=n {
                if self.terms[i].is_zero() || out.terms[n - i].is_zero() {
                    continue;
                }
                acc = acc.add(&self.terms[i].compose(&out.terms[n - i])?)?;
            }
            out.terms[n] = b0.compose(&acc)?.neg();
        }
        Ok(out)
    }

    /// Terminating exponential of a series with zero `h^0` term.
    pub fn hexp(&self) -> Result<Self> {
        if !self.terms[0].is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        let mut out = Self::one(self.h_order, self.dim(), self.floor(), self.hard_cap());
        let mut pow = out.clone();
        let mut fact = 1.0;
        for j in 1..=self.h_order {
            pow = pow.hmul(self)?;
            if pow.is_zero() {
                break;
            }
            fact *= j as f64;
            out = out.add(&pow.scale(T::from_f64(1.0 / fact)))?;
        }
        Ok(out)
    }

    /// Verify the growth condition `ord(a_n) ≤ n`.
    pub fn growth_audit(&self) -> GrowthReport {
        for (n, a) in self.terms.iter().enumerate() {
            if let Some(t) = a.top_order() {
                if t > n as i64 {
                    return GrowthReport { ok: false, first_violation: Some((n, t)) };
                }
            }
        }
        GrowthReport { ok: true, first_violation: None }
    }

    /// Re-truncate every coefficient to a different floor.
    pub fn with_floor(&self, floor: i64) -> Self {
        HSeries {
            h_order: self.h_order,
            terms: self.terms.iter().map(|t| t.with_floor(floor)).collect(),
        }
    }

    pub fn map_scalars<U: Scalar>(&self, f: &impl Fn(T) -> U) -> HSeries<U> {
        HSeries {
            h_order: self.h_order,
            terms: self.terms.iter().map(|t| t.map_scalars(f)).collect(),
        }
    }
}

/// Birkhoff-Mulase factorization of a unit `U` as `U = S^{-1} Y`.
///
/// The recursion rewrites `S U = Y` and solves order by order in `h` with the
/// D/S projection; there is no normalization freedom, so re-running it on the
/// same input is bitwise deterministic.
pub fn birkhoff_factor<T: Scalar>(input: &HSeries<T>) -> Result<HFactorization<T>> {
    if !input.is_unit() {
        return Err(Error::NotAUnit("factorization needs a unit".into()));
    }
    let nominal_floor = input.floor();
    // deepen the working floor by the largest positive order present so
    // that sub-floor truncation noise stays below the reported window
    let margin: i64 = input
        .terms
        .iter()
        .filter_map(|t| t.top_order())
        .max()
        .unwrap_or(0)
        .max(0);
    let u = u_lift(input, nominal_floor - margin);
    let dim = u.dim();
    let floor = u.floor();
    let hard = u.hard_cap();

    // order 0: u0 = s0^{-1} y0 with y0 the multiplication part of u0
    let u0 = &u.terms[0];
    let y0 = u0.d_part();
    if y0.top_order() != Some(0) {
        return Err(Error::NotAUnit("h^0 term has no invertible order-0 part".into()));
    }
    let u0_inv = u0.invert().map_err(|e| match e {
        Error::ModeOverflow(a, b) => Error::TruncationBudget(format!("mode overflow {a} > {b}")),
        e => e,
    })?;
    let s0 = y0.compose(&u0_inv)?;

    let mut s = HSeries::zero(u.h_order, dim, floor, hard);
    let mut y = HSeries::zero(u.h_order, dim, floor, hard);
    s.terms[0] = s0;
    y.terms[0] = y0;

    for n in 1..=u.h_order {
        // known part C_n = Σ_{i<n} s_i u_{n-i}
        let mut c_n = Symbol::zero(dim, floor, hard);
        for i in 0..n {
            if s.terms[i].is_zero() || u.terms[n - i].is_zero() {
                continue;
            }
            c_n = c_n.add(&s.terms[i].compose(&u.terms[n - i])?)?;
        }
        // s_n u0 + C_n = y_n with s_n of negative order and y_n differential:
        // y_n = d_part(C_n), s_n = -s_part(C_n) ∘ u0^{-1}
        let split = c_n.split_ds();
        y.terms[n] = split.d_part;
        s.terms[n] = split.s_part.compose(&u0_inv)?.neg();
    }
    Ok(HFactorization { s_factor: s, y_factor: y, nominal_floor })
}

fn u_lift<T: Scalar>(u: &HSeries<T>, floor: i64) -> HSeries<T> {
    if floor == u.floor() {
        u.clone()
    } else {
        u.with_floor(floor)
    }
}

impl<T: Scalar> HFactorization<T> {
    /// `S^{-1} Y` truncated to the input's floor, which must reproduce the
    /// factorized input.
    pub fn recompose(&self) -> Result<HSeries<T>> {
        Ok(self.s_factor.hinv()?.hmul(&self.y_factor)?.with_floor(self.nominal_floor))
    }

    /// Factors re-truncated to the input's floor.
    pub fn s_trunc(&self) -> HSeries<T> {
        self.s_factor.with_floor(self.nominal_floor)
    }

    pub fn y_trunc(&self) -> HSeries<T> {
        self.y_factor.with_floor(self.nominal_floor)
    }

    /// Structural checks from the factorization theorem: `S - 1` purely of
    /// order ≤ -1 in every h-coefficient and `y_n` differential of order ≤ n.
    pub fn structure_ok(&self) -> bool {
        let one = HSeries::one(
            self.s_factor.h_order,
            self.s_factor.dim(),
            self.s_factor.floor(),
            self.s_factor.hard_cap(),
        );
        let s_minus_one = match self.s_factor.sub(&one) {
            Ok(v) => v,
            Err(_) => return false,
        };
        let s_ok = s_minus_one
            .terms
            .iter()
            .all(|t| t.top_order().map_or(true, |o| o <= -1));
        let y_ok = self.y_factor.terms.iter().enumerate().all(|(n, t)| {
            t.comps.iter().all(|(&o, g)| g.is_zero() || (0..=n as i64).contains(&o))
        });
        s_ok && y_ok
    }
}
