use super::{Ball, Polytope};
use crate::error::{Error, Result};
use crate::numerics::Interval;
use nalgebra::{DMatrix, DVector};

/// Lazily evaluated convex set: support queries walk the combinator tree
/// using the support-function identities
/// `rho_AX(v) = rho_X(A^T v)`, `rho_{X+Y} = rho_X + rho_Y`,
/// `rho_hull = max`, `rho_intersection <= min`, `rho_kX = k rho_X`.
#[derive(Clone, Debug)]
pub enum SupportSet {
    Polytope(Polytope),
    Ball(Ball),
    Point(DVector<f64>),
    LinearImage(DMatrix<f64>, Box<SupportSet>),
    Translate(DVector<f64>, Box<SupportSet>),
    MinkowskiSum(Box<SupportSet>, Box<SupportSet>),
    HullJoin(Box<SupportSet>, Box<SupportSet>),
    /// Upper-bounds the intersection support by the minimum of the parts;
    /// only the `hi` endpoint of the result is certified.
    IntersectionUb(Box<SupportSet>, Box<SupportSet>),
    Scaled(f64, Box<SupportSet>),
}

impl SupportSet {
    pub fn polytope(p: Polytope) -> SupportSet {
        SupportSet::Polytope(p)
    }

    pub fn point(x: DVector<f64>) -> SupportSet {
        SupportSet::Point(x)
    }

    pub fn image(m: DMatrix<f64>, x: SupportSet) -> SupportSet {
        SupportSet::LinearImage(m, Box::new(x))
    }

    pub fn translate(t: DVector<f64>, x: SupportSet) -> SupportSet {
        SupportSet::Translate(t, Box::new(x))
    }

    pub fn minkowski(a: SupportSet, b: SupportSet) -> SupportSet {
        SupportSet::MinkowskiSum(Box::new(a), Box::new(b))
    }

    pub fn hull_join(a: SupportSet, b: SupportSet) -> SupportSet {
        SupportSet::HullJoin(Box::new(a), Box::new(b))
    }

    pub fn intersect_ub(a: SupportSet, b: SupportSet) -> SupportSet {
        SupportSet::IntersectionUb(Box::new(a), Box::new(b))
    }

    pub fn scaled(k: f64, x: SupportSet) -> Result<SupportSet> {
        if k < 0.0 {
            return Err(Error::Numeric("scaling factor must be nonnegative".into()));
        }
        Ok(SupportSet::Scaled(k, Box::new(x)))
    }

    pub fn dim(&self) -> usize {
        match self {
            SupportSet::Polytope(p) => p.dim(),
            SupportSet::Ball(b) => b.dim(),
            SupportSet::Point(x) => x.len(),
            SupportSet::LinearImage(m, _) => m.nrows(),
            SupportSet::Translate(t, _) => t.len(),
            SupportSet::MinkowskiSum(a, _)
            | SupportSet::HullJoin(a, _)
            | SupportSet::IntersectionUb(a, _)
            | SupportSet::Scaled(_, a) => a.dim(),
        }
    }

    /// Support value in direction `v`; the `hi` endpoint is the sound
    /// over-approximation used by every reachability bound.
    pub fn support(&self, v: &DVector<f64>) -> Result<Interval> {
        match self {
            SupportSet::Polytope(p) => p.support(v),
            SupportSet::Ball(b) => Ok(b.support(v)),
            SupportSet::Point(x) => {
                let mut acc = Interval::ZERO;
                for i in 0..v.len() {
                    acc += Interval::point(x[i]) * Interval::point(v[i]);
                }
                Ok(acc)
            }
            SupportSet::LinearImage(m, x) => x.support(&(m.transpose() * v)),
            SupportSet::Translate(t, x) => {
                let mut acc = x.support(v)?;
                for i in 0..v.len() {
                    acc += Interval::point(t[i]) * Interval::point(v[i]);
                }
                Ok(acc)
            }
            SupportSet::MinkowskiSum(a, b) => Ok(a.support(v)? + b.support(v)?),
            SupportSet::HullJoin(a, b) => Ok(a.support(v)?.hull(b.support(v)?)),
            SupportSet::IntersectionUb(a, b) => {
                let sa = a.support(v)?;
                let sb = b.support(v)?;
                Ok(Interval::new(sa.lo.min(sb.lo), sa.hi.min(sb.hi)))
            }
            SupportSet::Scaled(k, x) => Ok(x.support(v)?.scale(*k)),
        }
    }

    /// Vertex set when it is cheap and exact; `None` otherwise.
    pub fn vertices(&self, budget: usize) -> Option<Vec<DVector<f64>>> {
        match self {
            SupportSet::Polytope(p) => {
                let vs = p.vertices(12)?;
                (vs.len() <= budget).then_some(vs)
            }
            SupportSet::Point(x) => Some(vec![x.clone()]),
            SupportSet::Ball(_) | SupportSet::IntersectionUb(..) => None,
            SupportSet::LinearImage(m, x) => Some(
                x.vertices(budget)?
                    .into_iter()
                    .map(|v| m * v)
                    .collect(),
            ),
            SupportSet::Translate(t, x) => Some(
                x.vertices(budget)?
                    .into_iter()
                    .map(|v| v + t)
                    .collect(),
            ),
            SupportSet::Scaled(k, x) => Some(
                x.vertices(budget)?
                    .into_iter()
                    .map(|v| v * *k)
                    .collect(),
            ),
            SupportSet::MinkowskiSum(a, b) => {
                let va = a.vertices(budget)?;
                let vb = b.vertices(budget)?;
                if va.len().checked_mul(vb.len())? > budget {
                    return None;
                }
                let mut out = Vec::with_capacity(va.len() * vb.len());
                for x in &va {
                    for y in &vb {
                        out.push(x + y);
                    }
                }
                Some(out)
            }
            SupportSet::HullJoin(a, b) => {
                let mut va = a.vertices(budget)?;
                let vb = b.vertices(budget)?;
                if va.len() + vb.len() > budget {
                    return None;
                }
                va.extend(vb);
                Some(va)
            }
        }
    }

    /// Upper bound on `max {|x| : x in self}` from per-axis supports.
    pub fn radius_bound(&self) -> Result<f64> {
        let p = self.dim();
        let mut acc = Interval::ZERO;
        for i in 0..p {
            let e = axis(p, i, 1.0);
            let hi = self.support(&e)?.hi;
            let lo = -self.support(&(-e))?.hi;
            let m = hi.abs().max(lo.abs());
            if !m.is_finite() {
                return Err(Error::Unbounded(format!("axis {i}")));
            }
            acc += Interval::point(m).powi(2);
        }
        Ok(acc.sqrt()?.hi)
    }
}

fn axis(p: usize, i: usize, val: f64) -> DVector<f64> {
    let mut v = DVector::zeros(p);
    v[i] = val;
    v
}

/// Outer template polyhedron `{x : <dir_i, x> <= rho(dir_i)}`; directions
/// that see an unbounded support contribute no face.
pub fn template_concretize(x: &SupportSet, dirs: &[DVector<f64>]) -> Result<Polytope> {
    let p = x.dim();
    let mut rows = Vec::new();
    let mut offs = Vec::new();
    for d in dirs {
        let s = x.support(d)?;
        if s.hi.is_finite() {
            rows.push(d.clone());
            offs.push(s.hi);
        }
    }
    if rows.is_empty() {
        return Err(Error::Unbounded("template in every direction".into()));
    }
    let c = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    Polytope::new(c, DVector::from_vec(offs))
}

/// Ball over-approximation: per designated 2-d subspace the radius covers
/// the centered set in every direction of that plane; remaining axes keep
/// their exact interval supports.
///
/// Radii come from exact vertex projections when the set exposes its
/// vertices, otherwise from 64 sampled unit directions inflated by 1%
/// (recorded in the result).
pub fn ball_overapprox(x: &SupportSet, pairs: &[(usize, usize)]) -> Result<Ball> {
    let p = x.dim();
    for (a, b) in pairs {
        if *a >= p || *b >= p {
            return Err(Error::Dimension {
                context: "ball subspace pair".into(),
                expected: p,
                got: (*a).max(*b),
            });
        }
    }
    let mut hi = vec![0.0f64; p];
    let mut lo = vec![0.0f64; p];
    for i in 0..p {
        hi[i] = x.support(&axis(p, i, 1.0))?.hi;
        lo[i] = -x.support(&axis(p, i, -1.0))?.hi;
        if !hi[i].is_finite() || !lo[i].is_finite() {
            return Err(Error::Unbounded(format!(
                "ball over-approximation of a set unbounded on axis {i}"
            )));
        }
    }
    let center = DVector::from_fn(p, |i, _| 0.5 * (hi[i] + lo[i]));

    let verts = x.vertices(4096);
    let mut paired = vec![false; p];
    let mut pair_radii = Vec::new();
    let mut sampled = false;
    for &(a, b) in pairs {
        if paired[a] || paired[b] {
            return Err(Error::Model("overlapping subspace pairs".into()));
        }
        paired[a] = true;
        paired[b] = true;
        let radius = match &verts {
            Some(vs) => {
                let mut r = Interval::ZERO;
                for v in vs {
                    let da = Interval::point(v[a]) - Interval::point(center[a]);
                    let db = Interval::point(v[b]) - Interval::point(center[b]);
                    let n = (da.powi(2) + db.powi(2)).sqrt()?;
                    if n.hi > r.hi {
                        r = n;
                    }
                }
                r.hi
            }
            None => {
                sampled = true;
                let mut best = 0.0f64;
                for k in 0..64 {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
                    let mut d = DVector::zeros(p);
                    d[a] = t.cos();
                    d[b] = t.sin();
                    let s = x.support(&d)?.hi;
                    if !s.is_finite() {
                        return Err(Error::Unbounded(format!(
                            "ball subspace ({a},{b}) unbounded"
                        )));
                    }
                    let centered = s - (center[a] * d[a] + center[b] * d[b]);
                    best = best.max(centered);
                }
                best * 1.01
            }
        };
        pair_radii.push(((a, b), radius.max(0.0)));
    }

    let mut axis_radii = Vec::new();
    for i in 0..p {
        if !paired[i] {
            let r = (Interval::point(hi[i]) - Interval::point(center[i]))
                .hull(Interval::point(center[i]) - Interval::point(lo[i]))
                .hi
                .max(0.0);
            axis_radii.push((i, r));
        }
    }

    Ok(Ball {
        center,
        pair_radii,
        axis_radii,
        sampled,
    })
}

/// Supremum of `rho_X(R(theta) v)` over an angle interval, where `R`
/// rotates within the designated pair plane. Vertex sets get the exact
/// per-vertex critical angles; otherwise a padded sweep.
pub fn rotate_direction(
    x: &SupportSet,
    v: &DVector<f64>,
    theta: Interval,
    pair: (usize, usize),
) -> Result<Interval> {
    let (a, b) = pair;
    let rotated = |t: f64| -> DVector<f64> {
        let mut w = v.clone();
        w[a] = v[a] * t.cos() - v[b] * t.sin();
        w[b] = v[a] * t.sin() + v[b] * t.cos();
        w
    };

    if let SupportSet::Ball(ball) = x {
        // With the rotation plane matching one of the ball's discs (or not
        // touching any radius coordinate), the radii terms are invariant
        // and only the center contribution depends on the angle.
        let touches = |i: usize, j: usize| i == a || i == b || j == a || j == b;
        let invariant = ball
            .pair_radii
            .iter()
            .all(|&((i, j), _)| (i, j) == (a, b) || !touches(i, j))
            && ball.axis_radii.iter().all(|&(j, _)| j != a && j != b);
        if invariant {
            let mut radii = Interval::ZERO;
            for &((i, j), r) in &ball.pair_radii {
                let n2 = Interval::point(v[i]).powi(2) + Interval::point(v[j]).powi(2);
                radii += Interval::point(r) * n2.sqrt()?;
            }
            for &(j, r) in &ball.axis_radii {
                radii += Interval::point(r) * Interval::point(v[j]).abs();
            }
            let mut rest = Interval::ZERO;
            for i in 0..v.len() {
                if i != a && i != b {
                    rest += Interval::point(ball.center[i]) * Interval::point(v[i]);
                }
            }
            let (ca, cb) = (ball.center[a], ball.center[b]);
            let best = trig_max(ca * v[a] + cb * v[b], -ca * v[b] + cb * v[a], theta);
            return Ok(rest + radii + best);
        }
    }

    if let Some(vs) = x.vertices(4096) {
        let mut best = Interval::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for xv in &vs {
            // <x, R(t) v> = rest + A cos t + B sin t
            let mut rest = 0.0;
            for i in 0..v.len() {
                if i != a && i != b {
                    rest += xv[i] * v[i];
                }
            }
            let amp_a = xv[a] * v[a] + xv[b] * v[b];
            let amp_b = -xv[a] * v[b] + xv[b] * v[a];
            let m = trig_max(amp_a, amp_b, theta) + Interval::point(rest);
            if m.hi > best.hi {
                best = m;
            }
        }
        return Ok(best);
    }

    // padded sweep fallback
    let rad = x.radius_bound()?;
    let steps = 64;
    let mut best = Interval::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for k in 0..=steps {
        let t = theta.lo + theta.width() * k as f64 / steps as f64;
        let s = x.support(&rotated(t))?;
        if s.hi > best.hi {
            best = s;
        }
    }
    let pairlen = (v[a] * v[a] + v[b] * v[b]).sqrt();
    let pad = rad * pairlen * (theta.width() / steps as f64);
    Ok(best + Interval::new(0.0, pad.max(0.0)))
}

/// Maximum of `A cos t + B sin t` over a `t` interval, as an enclosure.
fn trig_max(a: f64, b: f64, theta: Interval) -> Interval {
    let g = |t: f64| {
        Interval::point(a) * Interval::point(t).cos() + Interval::point(b) * Interval::point(t).sin()
    };
    let mut best = g(theta.lo).hull(g(theta.hi));
    let amp = (a * a + b * b).sqrt();
    let tstar = b.atan2(a);
    for k in -1..=1 {
        let t = tstar + 2.0 * std::f64::consts::PI * k as f64;
        if theta.contains(t) {
            best = best.hull(Interval::widened(amp, 4));
        }
    }
    best
}
