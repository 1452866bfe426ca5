use super::Interval;
use crate::error::Result;
use num_complex::Complex64;

/// Rectangular complex interval: independent enclosures of real and
/// imaginary parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CInterval {
    pub re: Interval,
    pub im: Interval,
}

impl CInterval {
    pub const ONE: CInterval = CInterval {
        re: Interval { lo: 1.0, hi: 1.0 },
        im: Interval { lo: 0.0, hi: 0.0 },
    };

    pub fn point(z: Complex64) -> CInterval {
        CInterval {
            re: Interval::point(z.re),
            im: Interval::point(z.im),
        }
    }

    /// Box around `z` of half-width `delta` in each component.
    pub fn inflated(z: Complex64, delta: f64) -> CInterval {
        let d = Interval::new(-delta, delta);
        CInterval {
            re: Interval::point(z.re) + d,
            im: Interval::point(z.im) + d,
        }
    }

    pub fn add(self, o: CInterval) -> CInterval {
        CInterval {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }

    pub fn sub(self, o: CInterval) -> CInterval {
        CInterval {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }

    pub fn mul(self, o: CInterval) -> CInterval {
        CInterval {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    pub fn div(self, o: CInterval) -> Result<CInterval> {
        let den = o.norm_sqr();
        let num = self.mul(o.conj());
        Ok(CInterval {
            re: num.re.checked_div(den)?,
            im: num.im.checked_div(den)?,
        })
    }

    pub fn conj(self) -> CInterval {
        CInterval {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn scale(self, k: Interval) -> CInterval {
        CInterval {
            re: self.re * k,
            im: self.im * k,
        }
    }

    pub fn norm_sqr(self) -> Interval {
        let r2 = self.re * self.re;
        let i2 = self.im * self.im;
        // squares are nonnegative even if the factor straddles zero
        Interval::new(r2.lo.max(0.0), r2.hi) + Interval::new(i2.lo.max(0.0), i2.hi)
    }

    /// Modulus enclosure.
    pub fn modulus(self) -> Interval {
        self.norm_sqr().sqrt().expect("norm_sqr is nonnegative")
    }

    /// `z^n` by binary exponentiation on rectangular intervals.
    pub fn powi(self, n: u64) -> CInterval {
        let mut acc = CInterval::ONE;
        let mut base = self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            k >>= 1;
        }
        acc
    }

    pub fn contains(self, z: Complex64) -> bool {
        self.re.contains(z.re) && self.im.contains(z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_contain_exact() {
        let z = Complex64::new(0.985, 0.069101);
        let ci = CInterval::point(z);
        let p = ci.powi(17);
        assert!(p.contains(z.powi(17)));
        assert!(p.re.width() < 1e-12 && p.im.width() < 1e-12);
    }

    #[test]
    fn division_roundtrip() {
        let a = CInterval::point(Complex64::new(1.5, -0.25));
        let b = CInterval::point(Complex64::new(0.5, 2.0));
        let q = a.div(b).unwrap();
        let back = q.mul(b);
        assert!(back.contains(Complex64::new(1.5, -0.25)));
    }
}
