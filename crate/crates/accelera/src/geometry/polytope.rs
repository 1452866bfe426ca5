use super::lp::{solve_max, LpOutcome};
use crate::error::{Error, Result};
use crate::numerics::Interval;
use nalgebra::{DMatrix, DVector};

/// Convex polyhedron in constraint form `{x : C x <= d}`.
///
/// Construction rejects zero rows; axis-aligned bounded polytopes are
/// recognized so their supports evaluate in closed form instead of an LP.
#[derive(Clone, Debug)]
pub struct Polytope {
    c: DMatrix<f64>,
    d: DVector<f64>,
    bounding_box: Option<(DVector<f64>, DVector<f64>)>,
}

impl Polytope {
    pub fn new(c: DMatrix<f64>, d: DVector<f64>) -> Result<Polytope> {
        if c.nrows() != d.len() {
            return Err(Error::Dimension {
                context: "polytope constraints".into(),
                expected: c.nrows(),
                got: d.len(),
            });
        }
        for i in 0..c.nrows() {
            if c.row(i).iter().all(|&x| x == 0.0) {
                return Err(Error::Model(format!("zero constraint row {i}")));
            }
        }
        let bounding_box = detect_box(&c, &d);
        Ok(Polytope {
            c,
            d,
            bounding_box,
        })
    }

    /// Axis-aligned box `[lo_i, hi_i]` per dimension.
    pub fn from_box(lo: &DVector<f64>, hi: &DVector<f64>) -> Result<Polytope> {
        let p = lo.len();
        if hi.len() != p {
            return Err(Error::Dimension {
                context: "box bounds".into(),
                expected: p,
                got: hi.len(),
            });
        }
        for i in 0..p {
            if lo[i] > hi[i] {
                return Err(Error::EmptySet(format!("box axis {i}: [{}, {}]", lo[i], hi[i])));
            }
        }
        let mut c = DMatrix::zeros(2 * p, p);
        let mut d = DVector::zeros(2 * p);
        for i in 0..p {
            c[(2 * i, i)] = 1.0;
            d[2 * i] = hi[i];
            c[(2 * i + 1, i)] = -1.0;
            d[2 * i + 1] = -lo[i];
        }
        Ok(Polytope {
            c,
            d,
            bounding_box: Some((lo.clone(), hi.clone())),
        })
    }

    pub fn singleton(x: &DVector<f64>) -> Polytope {
        Polytope::from_box(x, x).expect("point box")
    }

    pub fn dim(&self) -> usize {
        self.c.ncols()
    }

    pub fn rows(&self) -> usize {
        self.c.nrows()
    }

    pub fn constraints(&self) -> (&DMatrix<f64>, &DVector<f64>) {
        (&self.c, &self.d)
    }

    pub fn as_box(&self) -> Option<(&DVector<f64>, &DVector<f64>)> {
        self.bounding_box.as_ref().map(|(l, h)| (l, h))
    }

    pub fn contains_point(&self, x: &DVector<f64>, slack: f64) -> bool {
        let v = &self.c * x;
        (0..self.rows()).all(|i| v[i] <= self.d[i] + slack)
    }

    /// Support value `sup { <x, v> : x in self }`, certified by interval
    /// evaluation of the optimum vertex. Unbounded directions yield an
    /// interval with `hi = +inf`.
    pub fn support(&self, v: &DVector<f64>) -> Result<Interval> {
        if v.len() != self.dim() {
            return Err(Error::Dimension {
                context: "support direction".into(),
                expected: self.dim(),
                got: v.len(),
            });
        }
        if let Some((lo, hi)) = &self.bounding_box {
            let mut acc = Interval::ZERO;
            for i in 0..v.len() {
                let bound = if v[i] >= 0.0 { hi[i] } else { lo[i] };
                acc += Interval::point(bound) * Interval::point(v[i]);
            }
            return Ok(acc);
        }
        match solve_max(v, &self.c, &self.d)? {
            LpOutcome::Optimal { x, .. } => {
                let mut acc = Interval::ZERO;
                for i in 0..v.len() {
                    acc += Interval::point(x[i]) * Interval::point(v[i]);
                }
                Ok(acc)
            }
            LpOutcome::Unbounded => Ok(Interval::new(f64::MAX, f64::INFINITY)),
            LpOutcome::Infeasible => Err(Error::EmptySet("support of empty polytope".into())),
        }
    }

    /// Feasibility via a phase-1 LP (boxes short-circuit).
    pub fn is_empty(&self) -> bool {
        if self.bounding_box.is_some() {
            return false;
        }
        let obj = DVector::zeros(self.dim());
        matches!(solve_max(&obj, &self.c, &self.d), Ok(LpOutcome::Infeasible))
    }

    /// All vertices by brute-force row combinations; `None` when the row
    /// count makes enumeration unreasonable or the set is unbounded in
    /// some combination sense.
    pub fn vertices(&self, max_rows: usize) -> Option<Vec<DVector<f64>>> {
        let p = self.dim();
        let r = self.rows();
        if let Some((lo, hi)) = &self.bounding_box {
            // box vertices, capped
            if p > 20 {
                return None;
            }
            let count = 1usize << p;
            if count > 4096 {
                return None;
            }
            let mut vs = Vec::with_capacity(count);
            for mask in 0..count {
                let v = DVector::from_fn(p, |i, _| {
                    if mask >> i & 1 == 1 {
                        hi[i]
                    } else {
                        lo[i]
                    }
                });
                vs.push(v);
            }
            return Some(dedup_points(vs));
        }
        if r > max_rows || p > r {
            return None;
        }
        let mut vs = Vec::new();
        let mut idx: Vec<usize> = (0..p).collect();
        loop {
            let m = DMatrix::from_fn(p, p, |a, b| self.c[(idx[a], b)]);
            let rhs = DVector::from_fn(p, |a, _| self.d[idx[a]]);
            if let Some(x) = m.lu().solve(&rhs) {
                if self.contains_point(&x, 1e-7 * (1.0 + x.amax())) {
                    vs.push(x);
                }
            }
            // next combination
            let mut i = p;
            loop {
                if i == 0 {
                    return Some(dedup_points(vs));
                }
                i -= 1;
                if idx[i] != i + r - p {
                    idx[i] += 1;
                    for j in i + 1..p {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
}

fn dedup_points(mut vs: Vec<DVector<f64>>) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vs.len());
    for v in vs.drain(..) {
        if !out
            .iter()
            .any(|u| (u - &v).amax() <= 1e-9 * (1.0 + v.amax()))
        {
            out.push(v);
        }
    }
    out
}

/// Recognize a conjunction of single-variable constraints that bounds
/// every axis from both sides.
fn detect_box(c: &DMatrix<f64>, d: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
    let p = c.ncols();
    let mut lo = vec![f64::NEG_INFINITY; p];
    let mut hi = vec![f64::INFINITY; p];
    for i in 0..c.nrows() {
        let mut nz = None;
        for j in 0..p {
            if c[(i, j)] != 0.0 {
                if nz.is_some() {
                    return None;
                }
                nz = Some(j);
            }
        }
        let j = nz?;
        let a = c[(i, j)];
        let b = d[i] / a;
        if a > 0.0 {
            hi[j] = hi[j].min(b);
        } else {
            lo[j] = lo[j].max(b);
        }
    }
    if (0..p).any(|j| !lo[j].is_finite() || !hi[j].is_finite() || lo[j] > hi[j]) {
        return None;
    }
    Some((DVector::from_vec(lo), DVector::from_vec(hi)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box2() -> Polytope {
        Polytope::from_box(
            &DVector::from_row_slice(&[-1.0, -1.0]),
            &DVector::from_row_slice(&[1.0, 1.0]),
        )
        .unwrap()
    }

    #[test]
    fn unit_box_axis_support() {
        let b = unit_box2();
        let s = b.support(&DVector::from_row_slice(&[1.0, 0.0])).unwrap();
        assert_eq!((s.lo, s.hi), (1.0, 1.0));
    }

    #[test]
    fn thermostat_initial_support() {
        let x0 = Polytope::from_box(
            &DVector::from_row_slice(&[5.0, 0.0]),
            &DVector::from_row_slice(&[40.0, 1.0]),
        )
        .unwrap();
        let s = x0.support(&DVector::from_row_slice(&[1.0, 0.0])).unwrap();
        assert_eq!(s.hi, 40.0);
    }

    #[test]
    fn general_polytope_support_matches_vertex_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            // random bounded 3-d polytope: box plus random cuts
            let lo = DVector::from_fn(3, |_, _| rng.gen_range(-2.0..-0.5));
            let hi = DVector::from_fn(3, |_, _| rng.gen_range(0.5..2.0));
            let bx = Polytope::from_box(&lo, &hi).unwrap();
            let (bc, bd) = bx.constraints();
            let extra = 3;
            let mut c = DMatrix::zeros(6 + extra, 3);
            let mut d = DVector::zeros(6 + extra);
            c.view_mut((0, 0), (6, 3)).copy_from(bc);
            d.rows_mut(0, 6).copy_from(bd);
            for i in 0..extra {
                for j in 0..3 {
                    c[(6 + i, j)] = rng.gen_range(-1.0..1.0);
                }
                d[6 + i] = rng.gen_range(0.5..2.0);
            }
            let poly = Polytope::new(c, d).unwrap();
            if poly.is_empty() {
                continue;
            }
            let verts = poly.vertices(12).expect("small polytope");
            assert!(!verts.is_empty());
            for _ in 0..20 {
                let v = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0f64));
                if v.amax() < 1e-3 {
                    continue;
                }
                let s = poly.support(&v).unwrap();
                let oracle = verts
                    .iter()
                    .map(|x| x.dot(&v))
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!(
                    (s.hi - oracle).abs() <= 1e-9 * (1.0 + oracle.abs()),
                    "support {} vs vertex oracle {}",
                    s.hi,
                    oracle
                );
            }
        }
    }

    #[test]
    fn empty_polytope_detected() {
        let c = DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let d = DVector::from_row_slice(&[-1.0, -1.0]); // x <= -1 and x >= 1
        let p = Polytope::new(c, d).unwrap();
        assert!(p.is_empty());
        assert!(p.support(&DVector::from_row_slice(&[1.0])).is_err());
    }

    #[test]
    fn unbounded_direction_reports_infinity() {
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]); // x1 <= 1, x2 free
        let d = DVector::from_row_slice(&[1.0]);
        let p = Polytope::new(c, d).unwrap();
        let s = p.support(&DVector::from_row_slice(&[0.0, 1.0])).unwrap();
        assert_eq!(s.hi, f64::INFINITY);
    }

    #[test]
    fn zero_row_rejected() {
        let c = DMatrix::from_row_slice(1, 2, &[0.0, 0.0]);
        let d = DVector::from_row_slice(&[1.0]);
        assert!(Polytope::new(c, d).is_err());
    }
}
