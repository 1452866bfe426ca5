use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A closed real interval `[lo, hi]` with outward-rounded endpoints.
///
/// `hi = +inf` is permitted only where an unbounded quantity is meaningful
/// (iteration counts, dropped faces); matrix entries built from intervals
/// keep finite endpoints unless a computation genuinely diverges.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Kind selector for [`ival_op`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Dispatch an arithmetic operation on intervals.
///
/// Division by an interval containing zero is a domain error.
pub fn ival_op(a: Interval, b: Interval, kind: ArithOp) -> Result<Interval> {
    match kind {
        ArithOp::Add => Ok(a + b),
        ArithOp::Sub => Ok(a - b),
        ArithOp::Mul => Ok(a * b),
        ArithOp::Div => a.checked_div(b),
    }
}

/// Two-sum error-free transformation: returns the exact rounding error of
/// `a + b` so the endpoint is nudged only when the sum was inexact.
#[inline]
fn sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

/// Exact residual of the rounded product via fused multiply-add.
#[inline]
fn prod_err(a: f64, b: f64, p: f64) -> f64 {
    f64::mul_add(a, b, -p)
}

#[inline]
fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_finite() && sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else if s == f64::INFINITY {
        f64::MAX
    } else {
        s
    }
}

#[inline]
fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_finite() && sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else if s == f64::NEG_INFINITY {
        f64::MIN
    } else {
        s
    }
}

#[inline]
fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if p.is_finite() && prod_err(a, b, p) < 0.0 {
        p.next_down()
    } else {
        p
    }
}

#[inline]
fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if p.is_finite() && prod_err(a, b, p) > 0.0 {
        p.next_up()
    } else {
        p
    }
}

#[inline]
fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if q.is_finite() {
        // true quotient - q has the sign of (a - q*b)/b
        let r = f64::mul_add(q, b, -a); // q*b - a
        if r != 0.0 && (r < 0.0) != (b < 0.0) {
            // (a - q*b)/b < 0  =>  q overshoots
            return q.next_down();
        }
    }
    q
}

#[inline]
fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if q.is_finite() {
        let r = f64::mul_add(q, b, -a);
        if r != 0.0 && (r < 0.0) == (b < 0.0) {
            return q.next_up();
        }
    }
    q
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    /// Enclosure of pi, outward rounded.
    pub const PI: Interval = Interval {
        lo: 3.141592653589793,
        hi: 3.1415926535897936,
    };

    /// Enclosure of 2*pi, outward rounded.
    pub const TWO_PI: Interval = Interval {
        lo: 6.283185307179586,
        hi: 6.283185307179587,
    };

    pub fn new(lo: f64, hi: f64) -> Interval {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Interval {
        Interval { lo: x, hi: x }
    }

    /// Interval spanning two values in either order.
    pub fn spanning(a: f64, b: f64) -> Interval {
        Interval {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    /// `x` widened by `ulps` representable steps on each side.
    pub fn widened(x: f64, ulps: u32) -> Interval {
        let mut lo = x;
        let mut hi = x;
        for _ in 0..ulps {
            lo = lo.next_down();
            hi = hi.next_up();
        }
        Interval { lo, hi }
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(self, other: Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(self, other: Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Magnitude range `{|x| : x in self}`.
    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Interval {
                lo: 0.0,
                hi: self.hi.max(-self.lo),
            }
        }
    }

    /// Largest magnitude of any member.
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn checked_div(self, rhs: Interval) -> Result<Interval> {
        if rhs.lo <= 0.0 && rhs.hi >= 0.0 {
            return Err(Error::DivisionByZero);
        }
        let cands = [
            (div_down(self.lo, rhs.lo), div_up(self.lo, rhs.lo)),
            (div_down(self.lo, rhs.hi), div_up(self.lo, rhs.hi)),
            (div_down(self.hi, rhs.lo), div_up(self.hi, rhs.lo)),
            (div_down(self.hi, rhs.hi), div_up(self.hi, rhs.hi)),
        ];
        let lo = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let hi = cands.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
        Ok(Interval { lo, hi })
    }

    /// `x^n` with sign-parity handling for intervals straddling zero.
    pub fn powi(self, n: u32) -> Interval {
        match n {
            0 => Interval::ONE,
            1 => self,
            _ => {
                if n % 2 == 0 && self.lo < 0.0 && self.hi > 0.0 {
                    // even power of straddling interval: [0, max(|lo|,|hi|)^n]
                    let m = self.abs();
                    let hi = pow_mono_up(m.hi, n);
                    Interval { lo: 0.0, hi }
                } else if self.hi <= 0.0 {
                    let m = -self; // positive
                    let p = m.pow_pos(n);
                    if n % 2 == 0 {
                        p
                    } else {
                        -p
                    }
                } else if self.lo < 0.0 {
                    // odd power, straddling: monotone
                    let lo = -pow_mono_up(-self.lo, n);
                    let hi = pow_mono_up(self.hi, n);
                    Interval { lo, hi }
                } else {
                    self.pow_pos(n)
                }
            }
        }
    }

    /// Power of a nonnegative interval by binary exponentiation.
    fn pow_pos(self, n: u32) -> Interval {
        debug_assert!(self.lo >= 0.0);
        let mut acc = Interval::ONE;
        let mut base = self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    /// Square root enclosure; lower endpoint clamped at zero.
    pub fn sqrt(self) -> Result<Interval> {
        if self.hi < 0.0 {
            return Err(Error::Numeric("sqrt of negative interval".into()));
        }
        let lo_in = self.lo.max(0.0);
        let lo = {
            let s = lo_in.sqrt();
            let r = f64::mul_add(s, s, -lo_in); // s^2 - lo
            if r > 0.0 {
                (s.next_down()).max(0.0)
            } else {
                s
            }
        };
        let hi = {
            let s = self.hi.sqrt();
            let r = f64::mul_add(s, s, -self.hi);
            if r < 0.0 {
                s.next_up()
            } else {
                s
            }
        };
        Ok(Interval { lo, hi })
    }

    /// Monotone enclosure of exp, widened for libm slop.
    pub fn exp(self) -> Interval {
        let lo = down_n(self.lo.exp(), 2).max(0.0);
        let hi = up_n(self.hi.exp(), 2);
        Interval { lo, hi }
    }

    /// Monotone enclosure of ln; domain must be positive.
    pub fn ln(self) -> Result<Interval> {
        if self.lo <= 0.0 {
            return Err(Error::Numeric("ln of non-positive interval".into()));
        }
        Ok(Interval {
            lo: down_n(self.lo.ln(), 2),
            hi: up_n(self.hi.ln(), 2),
        })
    }

    /// Enclosure of sin over the interval, quadrant-aware.
    pub fn sin(self) -> Interval {
        if !self.is_finite() || self.width() >= Interval::TWO_PI.lo {
            return Interval::new(-1.0, 1.0);
        }
        let (slo, shi) = (sin_enc(self.lo), sin_enc(self.hi));
        let mut lo = slo.lo.min(shi.lo);
        let mut hi = slo.hi.max(shi.hi);
        // critical points pi/2 + k*pi
        let k0 = ((self.lo / Interval::PI.lo) - 0.5).floor() as i64;
        for k in k0 - 1..=k0 + 3 {
            let crit = Interval::point(k as f64) * Interval::PI + Interval::PI * Interval::point(0.5);
            if crit.lo <= self.hi && crit.hi >= self.lo {
                if k.rem_euclid(2) == 0 {
                    hi = 1.0;
                } else {
                    lo = -1.0;
                }
            }
        }
        Interval {
            lo: lo.max(-1.0),
            hi: hi.min(1.0),
        }
    }

    pub fn cos(self) -> Interval {
        (self + Interval::PI * Interval::point(0.5)).sin()
    }

    /// Multiply by an exact scalar.
    pub fn scale(self, k: f64) -> Interval {
        self * Interval::point(k)
    }
}

fn pow_mono_up(x: f64, n: u32) -> f64 {
    Interval::point(x).pow_pos(n).hi
}

fn down_n(x: f64, n: u32) -> f64 {
    let mut v = x;
    for _ in 0..n {
        v = v.next_down();
    }
    v
}

fn up_n(x: f64, n: u32) -> f64 {
    let mut v = x;
    for _ in 0..n {
        v = v.next_up();
    }
    v
}

fn sin_enc(x: f64) -> Interval {
    Interval::widened(x.sin(), 3)
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, rhs.lo),
            hi: add_up(self.hi, rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, -rhs.hi),
            hi: add_up(self.hi, -rhs.lo),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let pairs = [
            (self.lo, rhs.lo),
            (self.lo, rhs.hi),
            (self.hi, rhs.lo),
            (self.hi, rhs.hi),
        ];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in pairs {
            if a == 0.0 || b == 0.0 {
                lo = lo.min(0.0);
                hi = hi.max(0.0);
            } else {
                lo = lo.min(mul_down(a, b));
                hi = hi.max(mul_up(a, b));
            }
        }
        Interval { lo, hi }
    }
}

impl Div for Interval {
    type Output = Interval;
    /// Panics on division by an interval containing zero; use
    /// [`Interval::checked_div`] to surface the error.
    fn div(self, rhs: Interval) -> Interval {
        self.checked_div(rhs).expect("interval division by zero")
    }
}

impl std::ops::AddAssign for Interval {
    fn add_assign(&mut self, rhs: Interval) {
        *self = *self + rhs;
    }
}

impl std::ops::SubAssign for Interval {
    fn sub_assign(&mut self, rhs: Interval) {
        *self = *self - rhs;
    }
}

impl std::ops::MulAssign for Interval {
    fn mul_assign(&mut self, rhs: Interval) {
        *self = *self * rhs;
    }
}

impl num_traits::Zero for Interval {
    fn zero() -> Interval {
        Interval::ZERO
    }
    fn is_zero(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }
}

impl num_traits::One for Interval {
    fn one() -> Interval {
        Interval::ONE
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[allow(unused, clippy::approx_constant)]
fn _pi_const_check() {
    // PI constants above are next_down/next_up of f64 pi; checked in tests.
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_constants_enclose() {
        assert!(Interval::PI.lo <= std::f64::consts::PI);
        assert!(Interval::PI.hi >= std::f64::consts::PI);
        assert!(Interval::PI.hi > Interval::PI.lo);
        assert!(Interval::TWO_PI.lo <= 2.0 * std::f64::consts::PI);
        assert!(Interval::TWO_PI.hi >= 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn exact_integer_endpoints_stay_exact() {
        let a = Interval::new(1.0, 2.0);
        let b = Interval::new(3.0, 4.0);
        let s = a + b;
        assert_eq!((s.lo, s.hi), (4.0, 6.0));
    }

    #[test]
    fn zero_annihilates() {
        let z = Interval::ZERO;
        let b = Interval::new(-5.0, 5.0);
        let p = z * b;
        assert_eq!((p.lo, p.hi), (0.0, 0.0));
    }

    #[test]
    fn inexact_sum_widens_outward() {
        let a = Interval::point(0.1);
        let b = Interval::point(0.2);
        let s = a + b;
        assert!(s.lo < s.hi, "inexact sum must have positive width");
        assert!(s.contains(0.1f64 + 0.2f64));
        // extended-precision oracle: the exact sum of the two doubles is
        // 0.3000000000000000166533453693773481063544750213623046875
        assert!(s.lo <= 0.3 && 0.3 <= s.hi);
    }

    #[test]
    fn pow_examples() {
        let p = Interval::point(2.0).powi(5);
        assert_eq!((p.lo, p.hi), (32.0, 32.0));
        let q = Interval::new(-1.0, 1.0).powi(2);
        assert_eq!((q.lo, q.hi), (0.0, 1.0));
        let r = Interval::point(0.985).powi(32);
        // extended-precision power oracle: 0.985^32 = 0.61653732802027347...
        assert!(r.contains(0.6165373280202734));
        assert!(r.width() < 1e-13, "{r:?}");
    }

    #[test]
    fn division_by_zero_interval_rejected() {
        let a = Interval::new(1.0, 2.0);
        assert!(matches!(
            ival_op(a, Interval::new(-1.0, 1.0), ArithOp::Div),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn sqrt_contains_truth() {
        let s = Interval::point(2.0).sqrt().unwrap();
        assert!(s.contains(std::f64::consts::SQRT_2));
        assert!(s.width() < 1e-15);
    }

    #[test]
    fn sin_hits_extrema() {
        let s = Interval::new(0.0, 4.0).sin(); // passes pi/2
        assert_eq!(s.hi, 1.0);
        assert!(s.lo <= 4.0f64.sin());
        let c = Interval::new(0.0, 0.5).cos();
        assert!(c.contains(1.0) || c.hi >= 0.5f64.cos());
        assert!(c.lo <= 0.5f64.cos() && c.hi >= 0.0f64.cos().min(1.0));
    }
}
