//! Abstract matrices: polyhedrally-constrained matrix families
//! over-approximating all powers of the loop body and the matching
//! input-accumulation sums, plus the constant/spherical input split that
//! makes varying inputs tractable.

mod geom_sum;
mod shape;
mod synth;

pub use geom_sum::geometric_sum_matrix;
pub use shape::{binom, Coord, CoordKind, MatrixShape, PowerFamily};
pub use synth::{abstract_apply, synthesize_abstract_matrix, AbstractMatrix};

use crate::error::{Error, Result};
use crate::geometry::{ball_overapprox, Ball, Polytope, SupportSet};
use crate::linalg::JordanForm;
use crate::numerics::Interval;
use nalgebra::{DMatrix, DVector};

/// Iteration-count range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Horizon {
    Finite(u64),
    Infinite,
}

impl Horizon {
    pub fn min_with(self, k: u64) -> u64 {
        match self {
            Horizon::Finite(n) => n.min(k),
            Horizon::Infinite => k,
        }
    }
}

/// Split of the input set `B U` into a constant drift plus a centered
/// deviation enclosed by a rotation-invariant ball in eigenspace
/// coordinates, with the accumulation set `(I-A)^-1 B U` when available.
#[derive(Clone, Debug)]
pub struct InputDecomposition {
    /// state-space constant input image `B u_c = S u_c'`
    pub drift: DVector<f64>,
    /// eigenspace center `u_c'`
    pub center_eigen: DVector<f64>,
    /// eigenspace deviation ball (centered at ~0)
    pub ball: Ball,
    /// state-space deviation set `B U - drift`
    pub dev_state: SupportSet,
    /// `(I-A)^-1 B U`; `None` when 1 is in the spectrum
    pub u_a: Option<SupportSet>,
}

pub fn input_decompose(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    u: &Polytope,
    jf: &JordanForm,
) -> Result<InputDecomposition> {
    let p = a.nrows();
    if b.nrows() != p || u.dim() != b.ncols() {
        return Err(Error::Dimension {
            context: "input decomposition".into(),
            expected: p,
            got: b.nrows(),
        });
    }
    let u_set = SupportSet::polytope(u.clone());
    // boundedness of U
    for i in 0..u.dim() {
        let mut e = DVector::zeros(u.dim());
        e[i] = 1.0;
        let hi = u_set.support(&e)?.hi;
        e[i] = -1.0;
        let lo = u_set.support(&e)?.hi;
        if !hi.is_finite() || !lo.is_finite() {
            return Err(Error::Unbounded(format!("input set on axis {i}")));
        }
    }

    let sinv_b = &jf.s_inv * b;
    let u_eigen = SupportSet::image(sinv_b, u_set.clone());
    let mut center = DVector::zeros(p);
    for i in 0..p {
        let mut e = DVector::zeros(p);
        e[i] = 1.0;
        let hi = u_eigen.support(&e)?.hi;
        e[i] = -1.0;
        let lo = -u_eigen.support(&e)?.hi;
        center[i] = 0.5 * (hi + lo);
    }
    let centered = SupportSet::translate(-center.clone(), u_eigen);
    let ball = ball_overapprox(&centered, &jf.paired_subspaces())?;

    let drift = &jf.s * &center;
    let bu = SupportSet::image(b.clone(), u_set.clone());
    let dev_state = SupportSet::translate(-drift.clone(), bu);

    let u_a = if jf.one_in_spectrum() {
        None
    } else {
        (DMatrix::identity(p, p) - a)
            .try_inverse()
            .map(|inv| SupportSet::image(inv * b, u_set))
    };

    Ok(InputDecomposition {
        drift,
        center_eigen: center,
        ball,
        dev_state,
        u_a,
    })
}

/// Spherical relaxation of the loop dynamics: each Jordan block replaced
/// by `sigma_max(block) * I`, leaving a per-block scalar rate.
#[derive(Clone, Debug)]
pub struct BallDynamics {
    pub rates: Vec<f64>,
}

pub fn build_ball_dynamics(jf: &JordanForm) -> BallDynamics {
    BallDynamics {
        rates: jf.blocks.iter().map(|b| b.sigma_max).collect(),
    }
}

impl BallDynamics {
    /// `A_b = S diag(rate_s I) S^-1` for inspection and tests.
    pub fn matrix(&self, jf: &JordanForm) -> DMatrix<f64> {
        let p = jf.dim();
        let mut d = DMatrix::zeros(p, p);
        for ((b, off), &r) in jf.blocks.iter().zip(jf.block_offsets()).zip(&self.rates) {
            for i in 0..b.real_dim() {
                d[(off + i, off + i)] = r;
            }
        }
        &jf.s * d * &jf.s_inv
    }

    /// Geometric accumulation factor `sum_(j<k) rate^j` per block.
    pub fn geo_factors(&self, horizon: Horizon) -> Result<Vec<Interval>> {
        self.rates.iter().map(|&r| geo_scalar(r, horizon)).collect()
    }

    /// Support of the accumulated deviation `(+)_(j<k) A_b^j S(ball)` in
    /// state direction `v`: per block the radius mass scales by the
    /// geometric factor and acts on the block-restricted norm of `S^T v`.
    pub fn accumulated_support(
        &self,
        jf: &JordanForm,
        ball: &Ball,
        v: &DVector<f64>,
        horizon: Horizon,
    ) -> Result<Interval> {
        let geo = self.geo_factors(horizon)?;
        let w = jf.s.transpose() * v;
        let offsets = jf.block_offsets();
        let mut acc = Interval::ZERO;
        for ((b, &off), g) in jf.blocks.iter().zip(&offsets).zip(&geo) {
            let d = b.real_dim();
            // whole-block radius mass
            let mut r2 = Interval::ZERO;
            for &((i, _), r) in &ball.pair_radii {
                if i >= off && i < off + d {
                    r2 += Interval::point(r).powi(2);
                }
            }
            for &(i, r) in &ball.axis_radii {
                if i >= off && i < off + d {
                    r2 += Interval::point(r).powi(2);
                }
            }
            let radius = r2.sqrt()?;
            if radius.hi == 0.0 && ball.center.iter().all(|&c| c == 0.0) {
                continue;
            }
            let mut w2 = Interval::ZERO;
            let mut cdot = Interval::ZERO;
            for i in 0..d {
                w2 += Interval::point(w[off + i]).powi(2);
                cdot += Interval::point(ball.center[off + i]) * Interval::point(w[off + i]);
            }
            acc += *g * (radius * w2.sqrt()? + cdot);
        }
        Ok(acc)
    }
}

fn geo_scalar(rate: f64, horizon: Horizon) -> Result<Interval> {
    let r = Interval::widened(rate.max(0.0), 2);
    match horizon {
        Horizon::Finite(0) => Ok(Interval::ZERO),
        Horizon::Finite(n) => {
            if (rate - 1.0).abs() < 1e-9 {
                let nn = Interval::point(n as f64);
                Ok(nn.hull(nn * r.powi((n - 1).min(u32::MAX as u64) as u32)))
            } else {
                let rn = r.powi(n.min(u32::MAX as u64) as u32);
                (Interval::ONE - rn).checked_div(Interval::ONE - r)
            }
        }
        Horizon::Infinite => {
            if r.hi < 1.0 {
                Interval::ONE.checked_div(Interval::ONE - r)
            } else {
                Ok(Interval::new(f64::MAX, f64::INFINITY))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::jordan_decompose;
    use approx::assert_relative_eq;

    fn thermostat() -> (DMatrix<f64>, DMatrix<f64>, Polytope, JordanForm) {
        let a = DMatrix::from_row_slice(2, 2, &[0.97, 0.1, -0.05, 1.0]);
        let b = DMatrix::from_row_slice(2, 2, &[0.02, 0.0, 0.0, 0.05]);
        let u = Polytope::from_box(
            &DVector::from_row_slice(&[5.0, 0.0]),
            &DVector::from_row_slice(&[40.0, 300.0]),
        )
        .unwrap();
        let jf = jordan_decompose(&a, 1e-8).unwrap();
        (a, b, u, jf)
    }

    #[test]
    fn point_input_has_zero_ball() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        let b = DMatrix::identity(2, 2);
        let pt = DVector::from_row_slice(&[1.0, 2.0]);
        let u = Polytope::singleton(&pt);
        let jf = jordan_decompose(&a, 1e-8).unwrap();
        let dec = input_decompose(&a, &b, &u, &jf).unwrap();
        assert!(dec.ball.max_radius() < 1e-9);
        assert_relative_eq!(dec.drift, pt, epsilon = 1e-9);
    }

    #[test]
    fn thermostat_ball_covers_vertex_images() {
        let (a, b, u, jf) = thermostat();
        let dec = input_decompose(&a, &b, &u, &jf).unwrap();
        // vertex-image oracle: every centered S^-1 B vertex inside the ball
        let sinv_b = &jf.s_inv * &b;
        let (lo, hi) = u.as_box().unwrap();
        for mask in 0..4u32 {
            let vx = DVector::from_fn(2, |i, _| if mask >> i & 1 == 1 { hi[i] } else { lo[i] });
            let img = &sinv_b * vx - &dec.center_eigen;
            let r = dec.ball.pair_radii[0].1;
            assert!(img.norm() <= r * (1.0 + 1e-9), "{} > {r}", img.norm());
        }
    }

    #[test]
    fn ball_dynamics_of_diagonal_is_abs() {
        let a = DMatrix::from_row_slice(2, 2, &[-0.5, 0.0, 0.0, 0.25]);
        let jf = jordan_decompose(&a, 1e-8).unwrap();
        let bd = build_ball_dynamics(&jf);
        let m = bd.matrix(&jf);
        assert_relative_eq!(m[(0, 0)], 0.5, epsilon = 1e-9);
        assert_relative_eq!(m[(1, 1)], 0.25, epsilon = 1e-9);
        assert!(m[(0, 1)].abs() < 1e-9 && m[(1, 0)].abs() < 1e-9);
    }

    #[test]
    fn thermostat_rotation_rate() {
        let (_, _, _, jf) = thermostat();
        let bd = build_ball_dynamics(&jf);
        assert_eq!(bd.rates.len(), 1);
        assert_relative_eq!(bd.rates[0], 0.975f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn geo_factor_examples() {
        let g = geo_scalar(0.5, Horizon::Finite(3)).unwrap();
        assert!(g.contains(1.75));
        let gi = geo_scalar(0.5, Horizon::Infinite).unwrap();
        assert!(gi.contains(2.0));
        let gu = geo_scalar(1.5, Horizon::Infinite).unwrap();
        assert_eq!(gu.hi, f64::INFINITY);
    }
}
