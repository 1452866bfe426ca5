use super::shape::{Coord, CoordKind, MatrixShape, PowerFamily};
use super::Horizon;
use crate::error::Result;
use crate::geometry::SupportSet;
use crate::linalg::JordanForm;
use crate::numerics::Interval;
use nalgebra::{DMatrix, DVector};

/// Polyhedrally-constrained matrix family `{S phi(m) S^-1 : Phi m <= f}`
/// over-approximating the loop-power (or input-accumulation) matrices for
/// every iteration count in `n_range`.
#[derive(Clone, Debug)]
pub struct AbstractMatrix {
    pub shape: MatrixShape,
    pub s: DMatrix<f64>,
    pub s_inv: DMatrix<f64>,
    pub n_lo: u64,
    pub n_hi: Horizon,
    /// faces `(w, f)` meaning `<w, m> <= f`
    pub faces: Vec<(DVector<f64>, f64)>,
    /// per-coordinate interval hull (box relaxation of the face set)
    pub coord_bounds: Vec<Interval>,
    /// enumerated vertices when the m-polytope is low-dimensional
    pub vertices: Option<Vec<DVector<f64>>>,
    pub dir_budget: usize,
}

/// How many leading iteration counts are sampled exhaustively; beyond
/// this the sample grid is geometric and gaps are covered by per-entry
/// modulus bounds.
const EXHAUSTIVE_SAMPLES: u64 = 256;
const VERTEX_BUDGET: usize = 10_000;
const VERTEX_DIM_LIMIT: usize = 13;

pub fn synthesize_abstract_matrix(
    jf: &JordanForm,
    family: PowerFamily,
    n_lo: u64,
    n_hi: Horizon,
    dir_budget: usize,
) -> Result<AbstractMatrix> {
    let shape = MatrixShape::of(jf, family);
    let d = shape.m_dim();

    let samples = sample_ks(n_lo, n_hi);
    let points: Vec<Vec<Interval>> = samples.iter().map(|&k| shape.m_at(k)).collect();
    let exhaustive_end = samples
        .iter()
        .cloned()
        .take_while(|&k| k <= n_lo + EXHAUSTIVE_SAMPLES)
        .last()
        .unwrap_or(n_lo);
    let limit = match n_hi {
        Horizon::Infinite => shape.m_limit(),
        Horizon::Finite(_) => None,
    };

    // per-coordinate interval hulls
    let mut coord_bounds = Vec::with_capacity(d);
    for c in 0..d {
        let mut hull = points
            .iter()
            .map(|p| p[c])
            .fold(None::<Interval>, |acc, iv| {
                Some(acc.map_or(iv, |a| a.hull(iv)))
            })
            .unwrap_or(Interval::ZERO);
        if let Some(lim) = &limit {
            hull = hull.hull(lim[c]);
        }
        if needs_tail(&samples, exhaustive_end, n_hi) {
            match shape.coord_range_hull(c, exhaustive_end, horizon_bound(n_hi)) {
                Some(r) => hull = hull.hull(r),
                None => hull = Interval::new(f64::NEG_INFINITY, f64::INFINITY),
            }
        }
        coord_bounds.push(hull);
    }

    // relational faces
    let mut faces = Vec::new();
    for (c, bd) in coord_bounds.iter().enumerate() {
        let mut e = DVector::zeros(d);
        if bd.hi.is_finite() {
            e[c] = 1.0;
            faces.push((e.clone(), bd.hi));
        }
        if bd.lo.is_finite() {
            e[c] = -1.0;
            faces.push((e, -bd.lo));
        }
    }
    if d <= VERTEX_DIM_LIMIT {
        for c1 in 0..d {
            for c2 in c1 + 1..d {
                if !coord_bounds[c1].is_finite() || !coord_bounds[c2].is_finite() {
                    continue;
                }
                let mut dirs: Vec<(f64, f64)> =
                    vec![(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
                dirs.extend(hull_edge_normals(&points, c1, c2, dir_budget));
                for (a, b) in dirs {
                    if let Some(f) = face_value(
                        &shape, &samples, &points, limit.as_deref(),
                        exhaustive_end, n_hi, &[(c1, a), (c2, b)],
                    ) {
                        let mut w = DVector::zeros(d);
                        w[c1] = a;
                        w[c2] = b;
                        faces.push((w, f));
                    }
                }
            }
        }
    }

    let vertices = enumerate_vertices(&shape, &faces, &coord_bounds);

    Ok(AbstractMatrix {
        shape,
        s: jf.s.clone(),
        s_inv: jf.s_inv.clone(),
        n_lo,
        n_hi,
        faces,
        coord_bounds,
        vertices,
        dir_budget,
    })
}

fn needs_tail(samples: &[u64], exhaustive_end: u64, n_hi: Horizon) -> bool {
    match n_hi {
        Horizon::Infinite => true,
        Horizon::Finite(n) => n > exhaustive_end && samples.last() != Some(&exhaustive_end),
    }
}

fn horizon_bound(n_hi: Horizon) -> Option<u64> {
    match n_hi {
        Horizon::Finite(n) => Some(n),
        Horizon::Infinite => None,
    }
}

fn sample_ks(n_lo: u64, n_hi: Horizon) -> Vec<u64> {
    let mut ks = Vec::new();
    let cap = match n_hi {
        Horizon::Finite(n) => n,
        Horizon::Infinite => u64::MAX,
    };
    let exh_end = cap.min(n_lo.saturating_add(EXHAUSTIVE_SAMPLES));
    let mut k = n_lo;
    while k <= exh_end {
        ks.push(k);
        k += 1;
    }
    // geometric grid beyond, per-entry modulus bounds cover the gaps
    let mut g = (exh_end.max(1) as f64 * 1.1).ceil() as u64;
    let geo_cap = cap.min(1 << 62);
    while g < geo_cap {
        ks.push(g);
        g = ((g as f64) * 1.1).ceil() as u64;
        if ks.len() > 4000 {
            break;
        }
    }
    if let Horizon::Finite(n) = n_hi {
        if ks.last() != Some(&n) {
            ks.push(n);
        }
    }
    ks
}

/// Sound face value for a sparse direction over the whole iteration
/// range: sampled cloud, continuous-relaxation extrema, limit point, and
/// modulus bounds for the unsampled tail.
#[allow(clippy::too_many_arguments)]
fn face_value(
    shape: &MatrixShape,
    samples: &[u64],
    points: &[Vec<Interval>],
    limit: Option<&[Interval]>,
    exhaustive_end: u64,
    n_hi: Horizon,
    coefs: &[(usize, f64)],
) -> Option<f64> {
    let mut best = f64::NEG_INFINITY;
    for p in points {
        let mut acc = Interval::ZERO;
        for &(c, a) in coefs {
            acc += p[c].scale(a);
        }
        best = best.max(acc.hi);
    }
    if let Some(lim) = limit {
        let mut acc = Interval::ZERO;
        for &(c, a) in coefs {
            acc += lim[c].scale(a);
        }
        best = best.max(acc.hi);
    }
    // continuous-relaxation extrema (pure entries only)
    if let Some(v) = continuous_extremum(shape, coefs, samples) {
        best = best.max(v);
    }
    // unsampled tail
    if needs_tail(samples, exhaustive_end, n_hi) {
        let mut tail = Interval::ZERO;
        for &(c, a) in coefs {
            tail += shape
                .coord_range_hull(c, exhaustive_end, horizon_bound(n_hi))?
                .scale(a);
        }
        best = best.max(tail.hi);
    }
    best.is_finite().then_some(best)
}

/// Supremum of the direction functional over real-valued `k`, for the
/// closed-form cases: a single conjugate pair's (re, im) coordinates, or
/// two pure real eigenvalue coordinates. Geometric-sum entries reduce to
/// the power case through `mu(k) = (1 - lam^k)/(1 - lam)`.
fn continuous_extremum(
    shape: &MatrixShape,
    coefs: &[(usize, f64)],
    samples: &[u64],
) -> Option<f64> {
    if coefs.len() != 2 {
        return None;
    }
    let (c1, a1) = coefs[0];
    let (c2, a2) = coefs[1];
    let k_lo = *samples.first()? as f64;
    let k_hi = *samples.last()? as f64;
    let co1 = &shape.coords[c1];
    let co2 = &shape.coords[c2];
    if co1.j != 0 || co2.j != 0 {
        return None;
    }

    let geom = shape.family == PowerFamily::GeometricSums;

    // same conjugate pair: g(k) = const + Re(c lam^k)
    if co1.kind == CoordKind::PairRe
        && co2.kind == CoordKind::PairIm
        && co1.block_offset == co2.block_offset
    {
        let lam = co1.lambda;
        let (cc, shift) = if geom {
            // a mu_re + b mu_im = Re((a - ib) mu), mu = (1 - lam^k)/(1-lam)
            let w = num_complex::Complex64::new(a1, -a2);
            let minv = w / (num_complex::Complex64::new(1.0, 0.0) - lam);
            (-minv, minv.re)
        } else {
            (num_complex::Complex64::new(a1, -a2), 0.0)
        };
        return trig_exp_max(cc, lam, k_lo, k_hi).map(|v| v + shift);
    }

    // two pure real coordinates: g(k) = s + b1 l1^k + b2 l2^k
    if co1.kind == CoordKind::Real && co2.kind == CoordKind::Real {
        let l1 = co1.lambda.re;
        let l2 = co2.lambda.re;
        if l1 <= 0.0 || l2 <= 0.0 || (l1 - 1.0).abs() < 1e-12 || (l2 - 1.0).abs() < 1e-12 {
            return None;
        }
        let (b1, b2, shift) = if geom {
            (-a1 / (1.0 - l1), -a2 / (1.0 - l2), a1 / (1.0 - l1) + a2 / (1.0 - l2))
        } else {
            (a1, a2, 0.0)
        };
        return two_exp_max(b1, l1, b2, l2, k_lo, k_hi).map(|v| v + shift);
    }

    None
}

/// max over k in [k_lo, k_hi] of `b1 l1^k + b2 l2^k` (l1, l2 > 0).
fn two_exp_max(b1: f64, l1: f64, b2: f64, l2: f64, k_lo: f64, k_hi: f64) -> Option<f64> {
    let g = |k: f64| b1 * l1.powf(k) + b2 * l2.powf(k);
    let mut best = g(k_lo).max(g(k_hi));
    let (r1, r2) = (l1.ln(), l2.ln());
    // g'(k) = b1 r1 l1^k + b2 r2 l2^k = 0
    let num = -b2 * r2;
    let den = b1 * r1;
    if den != 0.0 && num / den > 0.0 && (r1 - r2).abs() > 1e-15 {
        let kstar = (num / den).ln() / (r1 - r2);
        if kstar.is_finite() && kstar > k_lo && kstar < k_hi {
            best = best.max(g(kstar));
        }
    }
    best.is_finite().then_some(best * (1.0 + 1e-12) + f64::MIN_POSITIVE)
}

/// max over k in [k_lo, k_hi] of `Re(c lam^k)` = `|c| r^k cos(k theta + arg c)`.
fn trig_exp_max(
    c: num_complex::Complex64,
    lam: num_complex::Complex64,
    k_lo: f64,
    k_hi: f64,
) -> Option<f64> {
    let r = lam.norm();
    let th = lam.arg();
    if r <= 0.0 || th == 0.0 {
        return None;
    }
    let m = c.norm();
    let phi = c.arg();
    let g = |k: f64| m * r.powf(k) * (k * th + phi).cos();
    let mut best = g(k_lo).max(g(k_hi));
    // critical points: tan(k th + phi) = ln r / th
    let base = (r.ln() / th).atan();
    let mut br = ((k_lo * th + phi - base) / std::f64::consts::PI).floor() as i64 - 1;
    loop {
        let target = base + br as f64 * std::f64::consts::PI;
        let k = (target - phi) / th;
        if (th > 0.0 && k > k_hi) || (th < 0.0 && k < k_lo) || br > 1_000_000 {
            break;
        }
        if k > k_lo && k < k_hi {
            best = best.max(g(k));
        }
        br += 1;
    }
    best.is_finite().then_some(best * (1.0 + 1e-12) + f64::MIN_POSITIVE)
}

/// Outward normals of the longest convex-hull edges of the sampled cloud
/// projected to a coordinate pair.
fn hull_edge_normals(
    points: &[Vec<Interval>],
    c1: usize,
    c2: usize,
    budget: usize,
) -> Vec<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p[c1].midpoint(), p[c2].midpoint()))
        .collect();
    let hull = convex_hull_2d(&pts);
    if hull.len() < 3 {
        return Vec::new();
    }
    let mut edges: Vec<(f64, (f64, f64))> = Vec::new();
    for i in 0..hull.len() {
        let p = hull[i];
        let q = hull[(i + 1) % hull.len()];
        let e = (q.0 - p.0, q.1 - p.1);
        let len = (e.0 * e.0 + e.1 * e.1).sqrt();
        if len < 1e-12 {
            continue;
        }
        // hull is counter-clockwise: outward normal is (e.y, -e.x)
        let n = (e.1 / len, -e.0 / len);
        edges.push((len, n));
    }
    edges.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    edges.into_iter().take(budget).map(|(_, n)| n).collect()
}

fn convex_hull_2d(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut p: Vec<(f64, f64)> = pts.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    p.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-14);
    if p.len() < 3 {
        return p;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

// ---------------------------------------------------------------------
// vertex enumeration
// ---------------------------------------------------------------------

fn enumerate_vertices(
    shape: &MatrixShape,
    faces: &[(DVector<f64>, f64)],
    coord_bounds: &[Interval],
) -> Option<Vec<DVector<f64>>> {
    let d = shape.m_dim();
    if coord_bounds.iter().any(|b| !b.is_finite()) {
        return None;
    }
    if d == 1 {
        return Some(vec![
            DVector::from_row_slice(&[coord_bounds[0].lo]),
            DVector::from_row_slice(&[coord_bounds[0].hi]),
        ]);
    }
    if d == 2 {
        let poly = polygon_from_faces(faces, coord_bounds, 0, 1)?;
        return Some(
            poly.into_iter()
                .map(|(x, y)| DVector::from_row_slice(&[x, y]))
                .collect(),
        );
    }
    if d > VERTEX_DIM_LIMIT {
        return None;
    }
    // product over block groups; cross-group faces are dropped here (the
    // enumerated polytope is a superset, which is the sound direction)
    let mut group_vertices: Vec<Vec<Vec<f64>>> = Vec::new();
    for g in shape.groups() {
        let lo = g.first_coord;
        let n = g.n_coords;
        let mut vs: Vec<Vec<f64>> = Vec::new();
        if n == 1 {
            vs.push(vec![coord_bounds[lo].lo]);
            vs.push(vec![coord_bounds[lo].hi]);
        } else if n == 2 {
            let poly = polygon_from_faces(faces, coord_bounds, lo, lo + 1)?;
            for (x, y) in poly {
                vs.push(vec![x, y]);
            }
        } else {
            if n > 12 {
                return None;
            }
            for mask in 0..(1usize << n) {
                let mut v = Vec::with_capacity(n);
                for i in 0..n {
                    let b = coord_bounds[lo + i];
                    v.push(if mask >> i & 1 == 1 { b.hi } else { b.lo });
                }
                vs.push(v);
            }
        }
        group_vertices.push(vs);
    }
    let total: usize = group_vertices.iter().map(|v| v.len()).try_fold(1usize, |a, b| {
        a.checked_mul(b).filter(|&t| t <= VERTEX_BUDGET)
    })?;
    let _ = total;
    let mut out: Vec<DVector<f64>> = vec![DVector::zeros(d)];
    let mut filled = 0usize;
    for (g, vs) in shape.groups().iter().zip(&group_vertices) {
        let mut next = Vec::with_capacity(out.len() * vs.len());
        for base in &out {
            for v in vs {
                let mut nv = base.clone();
                for (i, &x) in v.iter().enumerate() {
                    nv[g.first_coord + i] = x;
                }
                next.push(nv);
            }
        }
        out = next;
        filled += g.n_coords;
    }
    debug_assert_eq!(filled, d);
    Some(out)
}

/// 2-d vertex enumeration by clipping the coordinate bounding box with
/// every face supported on exactly these two coordinates.
fn polygon_from_faces(
    faces: &[(DVector<f64>, f64)],
    coord_bounds: &[Interval],
    c1: usize,
    c2: usize,
) -> Option<Vec<(f64, f64)>> {
    let bx = coord_bounds[c1];
    let by = coord_bounds[c2];
    let pad_x = 1e-9 * (1.0 + bx.mag());
    let pad_y = 1e-9 * (1.0 + by.mag());
    let mut poly = vec![
        (bx.lo - pad_x, by.lo - pad_y),
        (bx.hi + pad_x, by.lo - pad_y),
        (bx.hi + pad_x, by.hi + pad_y),
        (bx.lo - pad_x, by.hi + pad_y),
    ];
    for (w, f) in faces {
        let mut a = 0.0;
        let mut b = 0.0;
        let mut other = false;
        for i in 0..w.len() {
            if w[i] != 0.0 {
                if i == c1 {
                    a = w[i];
                } else if i == c2 {
                    b = w[i];
                } else {
                    other = true;
                }
            }
        }
        if other || (a == 0.0 && b == 0.0) {
            continue;
        }
        poly = clip_halfplane(&poly, a, b, *f);
        if poly.is_empty() {
            return None;
        }
    }
    Some(poly)
}

fn clip_halfplane(poly: &[(f64, f64)], a: f64, b: f64, f: f64) -> Vec<(f64, f64)> {
    let inside = |p: (f64, f64)| a * p.0 + b * p.1 <= f + 1e-12 * (1.0 + f.abs());
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let pi = inside(p);
        let qi = inside(q);
        if pi {
            out.push(p);
        }
        if pi != qi {
            let dp = a * p.0 + b * p.1 - f;
            let dq = a * q.0 + b * q.1 - f;
            let t = dp / (dp - dq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    out
}

// ---------------------------------------------------------------------
// application
// ---------------------------------------------------------------------

impl AbstractMatrix {
    /// Concrete matrix for a given abstraction vector.
    pub fn matrix_at(&self, m: &DVector<f64>) -> DMatrix<f64> {
        &self.s * self.shape.phi(m.as_slice()) * &self.s_inv
    }

    /// Does `m` satisfy every synthesized face (with relative slack)?
    pub fn is_member(&self, m: &[Interval]) -> bool {
        self.faces.iter().all(|(w, f)| {
            let mut acc = Interval::ZERO;
            for i in 0..w.len() {
                if w[i] != 0.0 {
                    acc += m[i].scale(w[i]);
                }
            }
            acc.lo <= f + 1e-9 * (1.0 + f.abs())
        })
    }
}

/// Upper bound on `sup { rho_X(M^T v) : M in family }`.
///
/// With vertices available the supremum of the convex functional is taken
/// over the enumerated m-polytope vertices; otherwise the per-coordinate
/// interval hull drives a sound (looser) interval-arithmetic bound.
pub fn abstract_apply(am: &AbstractMatrix, x: &SupportSet, v: &DVector<f64>) -> Result<Interval> {
    if let Some(verts) = &am.vertices {
        let mut best = Interval::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for m in verts {
            let w = am.matrix_at(m).transpose() * v;
            let s = x.support(&w)?;
            if s.hi > best.hi {
                best = s;
            }
        }
        return Ok(best);
    }

    // interval fallback: w-box = (S phi(box) S^-1)^T v, then a box-hull
    // dot product against the per-axis supports of X
    let p = am.s.nrows();
    let phi = am.shape.phi_interval(&am.coord_bounds);
    let st_v: Vec<Interval> = (0..p)
        .map(|i| {
            let mut acc = Interval::ZERO;
            for r in 0..p {
                acc += Interval::point(am.s[(r, i)]) * Interval::point(v[r]);
            }
            acc
        })
        .collect();
    let phit: Vec<Interval> = (0..p)
        .map(|i| {
            let mut acc = Interval::ZERO;
            for r in 0..p {
                acc += phi[(r, i)] * st_v[r];
            }
            acc
        })
        .collect();
    let w_box: Vec<Interval> = (0..p)
        .map(|i| {
            let mut acc = Interval::ZERO;
            for r in 0..p {
                acc += Interval::point(am.s_inv[(r, i)]) * phit[r];
            }
            acc
        })
        .collect();

    let mut acc = Interval::ZERO;
    let mut e = DVector::zeros(p);
    for i in 0..p {
        e.fill(0.0);
        e[i] = 1.0;
        let hi = x.support(&e)?.hi;
        e[i] = -1.0;
        let lo = -x.support(&e)?.hi;
        acc += w_box[i] * Interval::new(lo.min(hi), hi.max(lo));
    }
    Ok(acc)
}
