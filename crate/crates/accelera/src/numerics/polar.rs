use super::{CInterval, Interval};
use num_complex::Complex64;

/// Polar enclosure of a set of complex numbers: modulus range times an
/// angle sector `radius * e^{i angle}` with `angle` a subset of `[0, 2pi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarRange {
    pub radius: Interval,
    pub angle: Interval,
}

impl PolarRange {
    pub fn new(radius: Interval, angle: Interval) -> PolarRange {
        debug_assert!(radius.lo >= 0.0, "negative modulus {radius:?}");
        let angle = Interval {
            lo: angle.lo.max(0.0),
            hi: angle.hi.min(Interval::TWO_PI.hi),
        };
        PolarRange { radius, angle }
    }

    /// Does the sector contain `z = r e^{i t}` (t reduced to `[0, 2pi)`)?
    pub fn contains(self, z: Complex64) -> bool {
        let r = z.norm();
        let mut t = z.arg();
        if t < 0.0 {
            t += 2.0 * std::f64::consts::PI;
        }
        self.radius.contains(r) && (self.angle.contains(t) || (t == 0.0 && self.angle.contains(0.0)))
    }
}

/// Polar enclosure of `{lambda^k : 0 <= k <= n}`.
///
/// The modulus range is `[min(1, r^n), max(1, r^n)]` (powers of the modulus
/// are monotone), and the accumulated rotation is capped at one full turn:
/// `angle = [0, min(n*theta, 2pi)]`.
pub fn polar_pow_range(lambda: Complex64, n: u64) -> PolarRange {
    let ci = CInterval::point(lambda);
    let r = ci.modulus();
    let rn = r.powi(n.min(u32::MAX as u64) as u32);
    let radius = rn.hull(Interval::ONE);

    let theta = arg_abs_enclosure(lambda);
    let n_iv = Interval::point(n as f64);
    let swept = theta * n_iv;
    let hi = if swept.hi >= Interval::TWO_PI.lo {
        Interval::TWO_PI.hi
    } else {
        swept.hi
    };
    PolarRange::new(radius, Interval::new(0.0, hi))
}

/// Enclosure of `|arg(lambda)|`, widened for libm slop.
pub fn arg_abs_enclosure(lambda: Complex64) -> Interval {
    let t = lambda.im.abs().atan2(lambda.re);
    Interval::widened(t, 4).intersect(Interval::new(0.0, Interval::PI.hi)).unwrap_or(Interval::new(0.0, Interval::PI.hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_unit_eigenvalue() {
        let p = polar_pow_range(Complex64::new(1.0, 0.0), 10);
        assert!(p.radius.contains(1.0) && p.radius.width() < 1e-14);
        assert_eq!(p.angle.lo, 0.0);
        assert!(p.angle.hi < 1e-12);
    }

    #[test]
    fn thermostat_pair() {
        // lambda = 0.985 e^{i 0.07}: radius covers [0.985^32, 1], angle [0, 2.24]
        // power oracle: 0.985^32 = 0.61653732802027347...
        let lam = Complex64::from_polar(0.985, 0.07);
        let p = polar_pow_range(lam, 32);
        assert!(p.radius.contains(0.6165373280202734), "{:?}", p.radius);
        assert!(p.radius.hi >= 1.0);
        assert!((p.angle.hi - 32.0 * 0.07).abs() < 1e-9, "{:?}", p.angle);
    }

    #[test]
    fn angle_saturates_at_full_turn() {
        let lam = Complex64::from_polar(2.0, std::f64::consts::PI);
        let p = polar_pow_range(lam, 2);
        assert!(p.radius.contains(1.0) && p.radius.contains(4.0));
        assert!(p.angle.hi >= Interval::TWO_PI.lo);
    }

    #[test]
    fn radius_covers_all_intermediate_powers() {
        // brute force over k in [0, n]
        for &(re, im) in &[(0.9, 0.3), (1.02, 0.11), (-0.4, 0.7)] {
            let lam = Complex64::new(re, im);
            for n in [1u64, 7, 32, 64] {
                let p = polar_pow_range(lam, n);
                for k in 0..=n {
                    let m = lam.powi(k as i32).norm();
                    assert!(
                        p.radius.lo <= m * (1.0 + 1e-12) && m <= p.radius.hi * (1.0 + 1e-12),
                        "|lam^{k}|={m} outside {:?} (n={n})",
                        p.radius
                    );
                }
            }
        }
    }
}
