use crate::numerics::Interval;
use nalgebra::DVector;

/// Center plus per-subspace radii: discs in designated 2-d subspaces
/// (rotation invariant there) and plain intervals on the remaining axes.
///
/// The support function has the closed form
/// `<center, v> + sum_pairs R * |(v_i, v_j)| + sum_axes r_j * |v_j|`.
#[derive(Clone, Debug)]
pub struct Ball {
    pub center: DVector<f64>,
    pub pair_radii: Vec<((usize, usize), f64)>,
    pub axis_radii: Vec<(usize, f64)>,
    /// True when a radius came from direction sampling (and was inflated)
    /// rather than exact vertex projection.
    pub sampled: bool,
}

impl Ball {
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn support(&self, v: &DVector<f64>) -> Interval {
        let mut acc = Interval::ZERO;
        for i in 0..v.len() {
            acc += Interval::point(self.center[i]) * Interval::point(v[i]);
        }
        for &((i, j), r) in &self.pair_radii {
            let n2 = Interval::point(v[i]).powi(2) + Interval::point(v[j]).powi(2);
            let n = n2.sqrt().expect("nonnegative");
            acc += Interval::point(r) * n;
        }
        for &(j, r) in &self.axis_radii {
            acc += Interval::point(r) * Interval::point(v[j]).abs();
        }
        acc
    }

    /// Scale all radii (not the center); used for geometric input sums.
    pub fn scaled_radii(&self, k: f64) -> Ball {
        Ball {
            center: self.center.clone(),
            pair_radii: self
                .pair_radii
                .iter()
                .map(|&(ij, r)| (ij, r * k))
                .collect(),
            axis_radii: self.axis_radii.iter().map(|&(j, r)| (j, r * k)).collect(),
            sampled: self.sampled,
        }
    }

    pub fn max_radius(&self) -> f64 {
        self.pair_radii
            .iter()
            .map(|&(_, r)| r)
            .chain(self.axis_radii.iter().map(|&(_, r)| r))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_support_is_rotation_invariant() {
        let b = Ball {
            center: DVector::zeros(2),
            pair_radii: vec![((0, 1), 1.0)],
            axis_radii: vec![],
            sampled: false,
        };
        for k in 0..16 {
            let t = k as f64 * 0.3927;
            let v = DVector::from_row_slice(&[t.cos(), t.sin()]);
            let s = b.support(&v);
            assert!((s.hi - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_axes_and_pairs() {
        let b = Ball {
            center: DVector::from_row_slice(&[1.0, 0.0, 2.0]),
            pair_radii: vec![((0, 1), 2.0)],
            axis_radii: vec![(2, 0.5)],
            sampled: false,
        };
        let s = b.support(&DVector::from_row_slice(&[0.0, 0.0, 1.0]));
        assert!((s.hi - 2.5).abs() < 1e-12);
        let s = b.support(&DVector::from_row_slice(&[1.0, 0.0, 0.0]));
        assert!((s.hi - 3.0).abs() < 1e-12);
    }
}
