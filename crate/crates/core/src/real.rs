//! Scalar abstraction shared by the residual kernels.
//!
//! The residual is written once, generic over [`Real`], and evaluated either
//! with `f64` or with forward-mode [`Dual`] numbers. The dual evaluation gives
//! exact directional derivatives, which the Newton corrector and the
//! Jacobian consistency tests rely on.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use nalgebra::Vector3;
use num_traits::{One, Zero};

pub trait Real:
    Copy
    + Debug
    + PartialEq
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Zero
    + One
{
    fn cst(x: f64) -> Self;
    /// Primal part.
    fn re(self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn atan2(self, x: Self) -> Self;
}

impl Real for f64 {
    #[inline]
    fn cst(x: f64) -> Self {
        x
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
}

/// First-order dual number `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub const fn new(re: f64, eps: f64) -> Self {
        Self { re, eps }
    }
}

impl Add for Dual {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl Sub for Dual {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl Mul for Dual {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl Div for Dual {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.re;
        Dual::new(self.re * inv, (self.eps * o.re - self.re * o.eps) * inv * inv)
    }
}

impl Neg for Dual {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for Dual {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl MulAssign for Dual {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl DivAssign for Dual {
    #[inline]
    fn div_assign(&mut self, o: Self) {
        *self = *self / o;
    }
}

impl Zero for Dual {
    fn zero() -> Self {
        Dual::new(0.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.eps == 0.0
    }
}

impl One for Dual {
    fn one() -> Self {
        Dual::new(1.0, 0.0)
    }
}

impl Real for Dual {
    #[inline]
    fn cst(x: f64) -> Self {
        Dual::new(x, 0.0)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        Dual::new(r, self.eps / (2.0 * r))
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.eps * e)
    }
    #[inline]
    fn atan2(self, x: Self) -> Self {
        let d = x.re * x.re + self.re * self.re;
        Dual::new(self.re.atan2(x.re), (x.re * self.eps - self.re * x.eps) / d)
    }
}

/// Euclidean norm for generic scalars.
#[inline]
pub fn norm<S: Real>(v: &Vector3<S>) -> S {
    v.dot(v).sqrt()
}

#[inline]
pub fn lift(v: &Vector3<f64>) -> Vector3<Dual> {
    Vector3::new(Dual::cst(v.x), Dual::cst(v.y), Dual::cst(v.z))
}

#[inline]
pub fn primal(v: &Vector3<Dual>) -> Vector3<f64> {
    Vector3::new(v.x.re, v.y.re, v.z.re)
}

#[inline]
pub fn tangent_part(v: &Vector3<Dual>) -> Vector3<f64> {
    Vector3::new(v.x.eps, v.y.eps, v.z.eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn dual_derivatives_match_finite_differences() {
        let x = 0.7;
        let d = Dual::new(x, 1.0);
        let g = |v: f64| (v.exp() * v.sqrt() - 3.0 * v) / (1.0 + v * v);
        let gd = (d.exp() * d.sqrt() - Dual::cst(3.0) * d) / (Dual::one() + d * d);
        assert!((gd.re - g(x)).abs() < 1e-15);
        assert!((gd.eps - fd(g, x)).abs() < 1e-8);

        let a = |v: f64| (2.0 * v).atan2(1.0 - v);
        let ad = (Dual::cst(2.0) * d).atan2(Dual::one() - d);
        assert!((ad.eps - fd(a, x)).abs() < 1e-8);
    }
}
