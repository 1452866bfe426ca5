//! Convex-set engine: constraint polytopes with LP-backed support
//! evaluation, lazy support-function combinators, ball over-approximations
//! in designated 2-d subspaces, and direction rotation for complex
//! eigenspaces.

mod ball;
mod lp;
mod polytope;
mod support;

pub use ball::Ball;
pub use lp::{solve_max, LpOutcome};
pub use polytope::Polytope;
pub use support::{ball_overapprox, rotate_direction, template_concretize, SupportSet};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Interval;
    use nalgebra::{DMatrix, DVector};

    fn unit_box(p: usize) -> SupportSet {
        SupportSet::polytope(
            Polytope::from_box(
                &DVector::from_element(p, -1.0),
                &DVector::from_element(p, 1.0),
            )
            .unwrap(),
        )
    }

    #[test]
    fn scaling_identity() {
        let x = unit_box(2);
        let v = DVector::from_row_slice(&[0.0, 1.0]);
        let s = SupportSet::scaled(2.0, x).unwrap().support(&v).unwrap();
        assert_eq!(s.hi, 2.0);
    }

    #[test]
    fn minkowski_doubling() {
        let x = unit_box(2);
        let s = SupportSet::minkowski(x.clone(), x)
            .support(&DVector::from_row_slice(&[1.0, 0.0]))
            .unwrap();
        assert_eq!(s.hi, 2.0);
    }

    #[test]
    fn linear_image_swaps_axes() {
        // A = [[0,1],[1,0]], X = [0,1]x[0,2]: rho_AX((1,0)) = 2
        let x = SupportSet::polytope(
            Polytope::from_box(
                &DVector::from_row_slice(&[0.0, 0.0]),
                &DVector::from_row_slice(&[1.0, 2.0]),
            )
            .unwrap(),
        );
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let s = SupportSet::image(a, x)
            .support(&DVector::from_row_slice(&[1.0, 0.0]))
            .unwrap();
        assert_eq!(s.hi, 2.0);
    }

    #[test]
    fn template_concretize_circle_to_box() {
        let disc = SupportSet::Ball(Ball {
            center: DVector::zeros(2),
            pair_radii: vec![((0, 1), 1.0)],
            axis_radii: vec![],
            sampled: false,
        });
        let dirs = vec![
            DVector::from_row_slice(&[1.0, 0.0]),
            DVector::from_row_slice(&[-1.0, 0.0]),
            DVector::from_row_slice(&[0.0, 1.0]),
            DVector::from_row_slice(&[0.0, -1.0]),
        ];
        let poly = template_concretize(&disc, &dirs).unwrap();
        let (lo, hi) = poly.as_box().expect("axis template is a box");
        assert!((hi[0] - 1.0).abs() < 1e-9 && (lo[0] + 1.0).abs() < 1e-9);
        assert!((hi[1] - 1.0).abs() < 1e-9 && (lo[1] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn ball_overapprox_singleton_has_zero_radius() {
        let pt = SupportSet::point(DVector::from_row_slice(&[3.0, 4.0]));
        let b = ball_overapprox(&pt, &[(0, 1)]).unwrap();
        assert!((b.center[0] - 3.0).abs() < 1e-12);
        assert!((b.center[1] - 4.0).abs() < 1e-12);
        assert!(b.pair_radii[0].1 < 1e-9);
    }

    #[test]
    fn ball_overapprox_square_reaches_corner() {
        let b = ball_overapprox(&unit_box(2), &[(0, 1)]).unwrap();
        let r = b.pair_radii[0].1;
        // dense direction sweep oracle: corner norm sqrt(2)
        assert!(r >= std::f64::consts::SQRT_2 - 1e-9, "r = {r}");
        assert!(r <= std::f64::consts::SQRT_2 + 1e-9, "exact via vertices");
    }

    #[test]
    fn ball_contains_set_in_sampled_directions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let x = SupportSet::polytope(
            Polytope::from_box(
                &DVector::from_row_slice(&[-0.5, 1.0, -2.0]),
                &DVector::from_row_slice(&[1.5, 3.0, 0.5]),
            )
            .unwrap(),
        );
        let b = ball_overapprox(&x, &[(0, 2)]).unwrap();
        for _ in 0..1000 {
            let v = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0f64));
            if v.amax() < 1e-6 {
                continue;
            }
            let sx = x.support(&v).unwrap().hi;
            let sb = b.support(&v).hi;
            assert!(sb >= sx - 1e-9, "ball {sb} below set {sx}");
        }
    }

    #[test]
    fn rotate_identity_interval_is_plain_support() {
        let x = unit_box(2);
        let v = DVector::from_row_slice(&[1.0, 0.0]);
        let s = rotate_direction(&x, &v, Interval::point(0.0), (0, 1)).unwrap();
        assert!((s.hi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rotate_quarter_turn_reaches_diagonal() {
        // sup over theta in [0, pi/2] of rho_box(R(theta) e1) = sqrt(2)
        let x = unit_box(2);
        let v = DVector::from_row_slice(&[1.0, 0.0]);
        let s = rotate_direction(&x, &v, Interval::new(0.0, std::f64::consts::FRAC_PI_2), (0, 1))
            .unwrap();
        assert!((s.hi - std::f64::consts::SQRT_2).abs() < 1e-6, "{}", s.hi);
    }

    #[test]
    fn rotate_ball_is_rotation_invariant() {
        let disc = SupportSet::Ball(Ball {
            center: DVector::zeros(2),
            pair_radii: vec![((0, 1), 1.0)],
            axis_radii: vec![],
            sampled: false,
        });
        let v = DVector::from_row_slice(&[1.0, 0.0]);
        let s = rotate_direction(&disc, &v, Interval::new(0.0, 5.0), (0, 1)).unwrap();
        assert!((s.hi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sublinearity_and_scaling_properties() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let lo = DVector::from_fn(3, |_, _| rng.gen_range(-2.0..0.0));
            let hi = DVector::from_fn(3, |_, _| rng.gen_range(0.0..2.0f64));
            let x = SupportSet::polytope(Polytope::from_box(&lo, &hi).unwrap());
            let v1 = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0f64));
            let v2 = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0f64));
            let s12 = x.support(&(&v1 + &v2)).unwrap().hi;
            let s1 = x.support(&v1).unwrap().hi;
            let s2 = x.support(&v2).unwrap().hi;
            assert!(s12 <= s1 + s2 + 1e-9, "sublinearity violated");
            let k = rng.gen_range(0.0..3.0);
            let sk = x.support(&(&v1 * k)).unwrap().hi;
            assert!((sk - k * s1).abs() <= 1e-9 * (1.0 + sk.abs()));
        }
    }

    #[test]
    fn hull_join_and_intersection_bounds() {
        let a = unit_box(2);
        let shifted = SupportSet::translate(DVector::from_row_slice(&[3.0, 0.0]), unit_box(2));
        let v = DVector::from_row_slice(&[1.0, 0.0]);
        let j = SupportSet::hull_join(a.clone(), shifted.clone());
        assert_eq!(j.support(&v).unwrap().hi, 4.0);
        let m = SupportSet::intersect_ub(a, shifted);
        assert_eq!(m.support(&v).unwrap().hi, 1.0);
    }
}
