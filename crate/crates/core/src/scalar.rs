//! Scalar abstraction: complex numbers and first-order (dual-number) jets.
//!
//! All coefficient arithmetic in the calculus is generic over [`Scalar`] so
//! that time derivatives of KP solutions can be obtained by running the whole
//! pipeline (exponential, factorization, conjugation) over dual numbers.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

/// Field-like scalar with a complex value part.
pub trait Scalar:
    Copy
    + Clone
    + fmt::Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_c64(z: C64) -> Self;
    fn from_f64(x: f64) -> Self {
        Self::from_c64(C64::new(x, 0.0))
    }
    fn i() -> Self {
        Self::from_c64(C64::new(0.0, 1.0))
    }
    /// Complex conjugate (on jets: conjugate both components).
    fn conj(self) -> Self;
    /// Value part, discarding any jet component.
    fn value(self) -> C64;
    /// Modulus of the value part.
    fn modulus(self) -> f64 {
        self.value().norm()
    }
    fn is_zero(self) -> bool;
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_c64(z: C64) -> Self {
        z
    }
    fn conj(self) -> Self {
        num_complex::Complex::conj(&self)
    }
    fn value(self) -> C64 {
        self
    }
    fn is_zero(self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

/// First-order jet `a + b ε`, `ε² = 0`, with complex components.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Dual {
    pub val: C64,
    pub eps: C64,
}

impl Dual {
    pub fn new(val: C64, eps: C64) -> Self {
        Dual { val, eps }
    }
    pub fn constant(val: C64) -> Self {
        Dual { val, eps: C64::new(0.0, 0.0) }
    }
    /// Jet variable: value `x`, unit derivative component.
    pub fn variable(val: C64) -> Self {
        Dual { val, eps: C64::new(1.0, 0.0) }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.val + rhs.val, self.eps + rhs.eps)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.val - rhs.val, self.eps - rhs.eps)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(self.val * rhs.val, self.val * rhs.eps + self.eps * rhs.val)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        let inv = C64::new(1.0, 0.0) / rhs.val;
        Dual::new(self.val * inv, (self.eps - self.val * inv * rhs.eps) * inv)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.val, -self.eps)
    }
}

impl Scalar for Dual {
    fn zero() -> Self {
        Dual::constant(C64::new(0.0, 0.0))
    }
    fn one() -> Self {
        Dual::constant(C64::new(1.0, 0.0))
    }
    fn from_c64(z: C64) -> Self {
        Dual::constant(z)
    }
    fn conj(self) -> Self {
        Dual::new(num_complex::Complex::conj(&self.val), num_complex::Complex::conj(&self.eps))
    }
    fn value(self) -> C64 {
        self.val
    }
    fn is_zero(self) -> bool {
        self.val == C64::new(0.0, 0.0) && self.eps == C64::new(0.0, 0.0)
    }
}
