use crate::linalg::JordanForm;
use crate::numerics::{CInterval, Interval};
use num_complex::Complex64;

/// Which matrix family the abstraction vector parameterizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerFamily {
    /// Powers of the loop body: entries `binom(k,j) lambda^(k-j)`.
    MatrixPowers,
    /// Accumulated-input sums `sum_(t<k) J^t`: entries
    /// `sum_(t<k) binom(t,j) lambda^(t-j)`.
    GeometricSums,
}

/// Maps the abstraction vector `m` onto the Jordan-shaped matrix: one
/// scalar per superdiagonal entry of each real block, a (re, im) pair per
/// rotation sub-block of each conjugate-pair block.
#[derive(Clone, Debug)]
pub struct MatrixShape {
    pub coords: Vec<Coord>,
    pub dim: usize,
    pub family: PowerFamily,
    groups: Vec<CoordGroup>,
}

/// m-coordinates contributed by one Jordan block.
#[derive(Clone, Debug)]
pub struct CoordGroup {
    pub first_coord: usize,
    pub n_coords: usize,
}

/// One component of the abstraction vector.
#[derive(Clone, Debug)]
pub struct Coord {
    /// eigenvalue inflated by the decomposition residual
    pub lambda: Complex64,
    pub delta: f64,
    /// superdiagonal column within the block
    pub j: usize,
    pub kind: CoordKind,
    /// realified row offset of the block
    pub block_offset: usize,
    /// block chain length
    pub block_size: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoordKind {
    Real,
    PairRe,
    PairIm,
}

impl MatrixShape {
    pub fn of(jf: &JordanForm, family: PowerFamily) -> MatrixShape {
        let mut coords = Vec::new();
        let mut groups = Vec::new();
        let offsets = jf.block_offsets();
        for (b, off) in jf.blocks.iter().zip(offsets) {
            let first = coords.len();
            for j in 0..b.size {
                if b.is_conjugate_pair {
                    coords.push(Coord {
                        lambda: b.lambda,
                        delta: jf.delta_max,
                        j,
                        kind: CoordKind::PairRe,
                        block_offset: off,
                        block_size: b.size,
                    });
                    coords.push(Coord {
                        lambda: b.lambda,
                        delta: jf.delta_max,
                        j,
                        kind: CoordKind::PairIm,
                        block_offset: off,
                        block_size: b.size,
                    });
                } else {
                    coords.push(Coord {
                        lambda: b.lambda,
                        delta: jf.delta_max,
                        j,
                        kind: CoordKind::Real,
                        block_offset: off,
                        block_size: b.size,
                    });
                }
            }
            groups.push(CoordGroup {
                first_coord: first,
                n_coords: coords.len() - first,
            });
        }
        MatrixShape {
            coords,
            dim: jf.dim(),
            family,
            groups,
        }
    }

    pub fn m_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn groups(&self) -> &[CoordGroup] {
        &self.groups
    }

    /// Concrete abstraction vector `m(k)` as an interval box.
    pub fn m_at(&self, k: u64) -> Vec<Interval> {
        self.coords.iter().map(|c| c.eval(k, self.family)).collect()
    }

    /// Limit of `m(k)` as `k -> inf`, when every coordinate converges.
    pub fn m_limit(&self) -> Option<Vec<Interval>> {
        self.coords
            .iter()
            .map(|c| c.limit(self.family))
            .collect::<Option<Vec<_>>>()
    }

    /// Is every coordinate bounded uniformly over all `k >= 1`?
    pub fn bounded_forever(&self) -> bool {
        self.coords.iter().all(|c| c.bounded_forever(self.family))
    }

    /// Upper bound on `|m_c(k)|` over integer `k` in `[a, b]`.
    pub fn coord_abs_bound(&self, c: usize, a: u64, b: u64) -> f64 {
        self.coords[c].abs_bound(a, b, self.family)
    }

    /// Signed enclosure of `{m_c(k) : a <= k <= b}` (`b = None` reads as
    /// infinity). Monotone nonnegative-eigenvalue entries keep their sign
    /// and endpoints; everything else falls back to the modulus bound.
    pub fn coord_range_hull(&self, c: usize, a: u64, b: Option<u64>) -> Option<Interval> {
        let co = &self.coords[c];
        let fam = self.family;
        let nonneg_real = co.kind == CoordKind::Real && co.lambda.re - co.delta >= 0.0;
        if nonneg_real {
            let mut hull = co.eval(a, fam);
            match b {
                Some(bf) => {
                    hull = hull.hull(co.eval(bf, fam));
                    // binomial-weighted entries peak in the interior
                    let r = co.modulus().hi;
                    for k in unimodal_candidates(co.j, r, a, bf) {
                        hull = hull.hull(co.eval(k, fam));
                    }
                }
                None => {
                    if !co.bounded_forever(fam) {
                        return None;
                    }
                    if let Some(lim) = co.limit(fam) {
                        hull = hull.hull(lim);
                    }
                    let r = co.modulus().hi;
                    for k in unimodal_candidates(co.j, r, a, a.saturating_mul(1 << 20)) {
                        hull = hull.hull(co.eval(k, fam));
                    }
                }
            }
            return Some(hull);
        }
        let bb = match b {
            Some(bf) => bf,
            None => {
                if !co.bounded_forever(fam) {
                    return None;
                }
                a.saturating_mul(1 << 20)
            }
        };
        let m = co.abs_bound(a, bb, fam);
        m.is_finite().then(|| Interval::new(-m, m))
    }

    /// Fill the Jordan-shaped matrix from a concrete `m`.
    pub fn phi(&self, m: &[f64]) -> nalgebra::DMatrix<f64> {
        let mut out = nalgebra::DMatrix::zeros(self.dim, self.dim);
        let mut idx = 0;
        while idx < self.coords.len() {
            let c = &self.coords[idx];
            let off = c.block_offset;
            match c.kind {
                CoordKind::Real => {
                    // value on the j-th superdiagonal of the block
                    for r in 0..(c.block_size - c.j) {
                        out[(off + r, off + r + c.j)] = m[idx];
                    }
                    idx += 1;
                }
                CoordKind::PairRe => {
                    let re = m[idx];
                    let im = m[idx + 1];
                    for r in 0..(c.block_size - c.j) {
                        let (ro, co) = (off + 2 * r, off + 2 * (r + c.j));
                        out[(ro, co)] = re;
                        out[(ro, co + 1)] = im;
                        out[(ro + 1, co)] = -im;
                        out[(ro + 1, co + 1)] = re;
                    }
                    idx += 2;
                }
                CoordKind::PairIm => unreachable!("consumed with PairRe"),
            }
        }
        out
    }

    /// Interval variant of [`MatrixShape::phi`].
    pub fn phi_interval(&self, m: &[Interval]) -> nalgebra::DMatrix<Interval> {
        let mut out =
            nalgebra::DMatrix::from_element(self.dim, self.dim, Interval::ZERO);
        let mut idx = 0;
        while idx < self.coords.len() {
            let c = &self.coords[idx];
            let off = c.block_offset;
            match c.kind {
                CoordKind::Real => {
                    for r in 0..(c.block_size - c.j) {
                        out[(off + r, off + r + c.j)] = m[idx];
                    }
                    idx += 1;
                }
                CoordKind::PairRe => {
                    let re = m[idx];
                    let im = m[idx + 1];
                    for r in 0..(c.block_size - c.j) {
                        let (ro, co) = (off + 2 * r, off + 2 * (r + c.j));
                        out[(ro, co)] = re;
                        out[(ro, co + 1)] = im;
                        out[(ro + 1, co)] = -im;
                        out[(ro + 1, co + 1)] = re;
                    }
                    idx += 2;
                }
                CoordKind::PairIm => unreachable!(),
            }
        }
        out
    }
}

impl Coord {
    fn is_real(&self) -> bool {
        self.kind == CoordKind::Real
    }

    pub fn modulus(&self) -> Interval {
        CInterval::inflated(self.lambda, self.delta).modulus()
    }

    fn lambda_real(&self) -> Interval {
        Interval::new(self.lambda.re - self.delta, self.lambda.re + self.delta)
    }

    fn is_one(&self) -> bool {
        self.is_real() && (self.lambda.re - 1.0).abs() <= self.delta.max(1e-12)
    }

    /// Entry value at power/sum index `k`.
    pub fn eval(&self, k: u64, family: PowerFamily) -> Interval {
        match family {
            PowerFamily::MatrixPowers => self.eval_pow(k),
            PowerFamily::GeometricSums => self.eval_geom(k),
        }
    }

    fn eval_pow(&self, k: u64) -> Interval {
        if k < self.j as u64 {
            return Interval::ZERO;
        }
        if self.is_real() {
            binom(k, self.j) * self.lambda_real().powi((k - self.j as u64).min(u32::MAX as u64) as u32)
        } else {
            let z = cpow(self.lambda, self.delta, k - self.j as u64).scale(binom(k, self.j));
            match self.kind {
                CoordKind::PairRe => z.re,
                CoordKind::PairIm => z.im,
                CoordKind::Real => unreachable!(),
            }
        }
    }

    fn eval_geom(&self, k: u64) -> Interval {
        if self.is_one() {
            // sum_(t<k) binom(t, j) = binom(k, j+1)
            return binom(k, self.j + 1)
                + Interval::new(-self.delta, self.delta).scale(k as f64);
        }
        if self.is_real() {
            geom_entry_real(self.lambda_real(), self.j, k)
        } else {
            let z = geom_entry_complex(self.lambda, self.delta, self.j, k);
            match self.kind {
                CoordKind::PairRe => z.re,
                CoordKind::PairIm => z.im,
                CoordKind::Real => unreachable!(),
            }
        }
    }

    fn limit(&self, family: PowerFamily) -> Option<Interval> {
        let r = self.modulus();
        match family {
            PowerFamily::MatrixPowers => {
                if r.hi < 1.0 {
                    Some(Interval::ZERO)
                } else if self.is_one() && self.j == 0 {
                    Some(Interval::widened(1.0, 1).hull(self.lambda_real()))
                } else {
                    None
                }
            }
            PowerFamily::GeometricSums => {
                if r.hi < 1.0 {
                    if self.is_real() {
                        // (1-lambda)^-(j+1)
                        let one_minus = Interval::ONE - self.lambda_real();
                        let mut acc = Interval::ONE;
                        for _ in 0..=self.j {
                            acc = acc.checked_div(one_minus).ok()?;
                        }
                        Some(acc)
                    } else {
                        let one_minus = CInterval::ONE.sub(CInterval::inflated(self.lambda, self.delta));
                        let mut acc = CInterval::ONE;
                        for _ in 0..=self.j {
                            acc = acc.div(one_minus).ok()?;
                        }
                        match self.kind {
                            CoordKind::PairRe => Some(acc.re),
                            CoordKind::PairIm => Some(acc.im),
                            CoordKind::Real => unreachable!(),
                        }
                    }
                } else {
                    None
                }
            }
        }
    }

    fn bounded_forever(&self, family: PowerFamily) -> bool {
        let r = self.modulus();
        match family {
            // |lambda| certified <= 1 keeps pure entries bounded; binomial
            // columns need strict contraction
            PowerFamily::MatrixPowers => r.hi < 1.0 || (self.j == 0 && r.hi <= 1.0),
            PowerFamily::GeometricSums => r.hi < 1.0,
        }
    }

    pub fn bounded_forever_pub(&self, family: PowerFamily) -> bool {
        self.bounded_forever(family)
    }

    /// Sound upper bound on `|entry(k)|` for integer `k` in `[a, b]`.
    fn abs_bound(&self, a: u64, b: u64, family: PowerFamily) -> f64 {
        let r = self.modulus().hi;
        match family {
            PowerFamily::MatrixPowers => {
                // |binom(k,j) lambda^(k-j)| is unimodal in k
                let cands = unimodal_candidates(self.j, r, a, b);
                cands
                    .into_iter()
                    .map(|k| (binom(k, self.j) * Interval::point(r).powi((k - self.j as u64).min(u32::MAX as u64) as u32)).hi)
                    .fold(0.0, f64::max)
            }
            PowerFamily::GeometricSums => {
                if self.is_one() {
                    return (binom(b, self.j + 1) + Interval::widened(self.delta * b as f64, 2)).hi;
                }
                // termwise modulus of the closed form, each term unimodal
                let one_minus = (CInterval::ONE.sub(CInterval::inflated(self.lambda, self.delta)))
                    .modulus();
                let inv = |pow: usize| -> f64 {
                    let mut acc = Interval::ONE;
                    for _ in 0..pow {
                        acc = acc.checked_div(one_minus).unwrap_or(Interval::new(0.0, f64::INFINITY));
                    }
                    acc.hi
                };
                let mut total = (Interval::ONE + Interval::point(r).powi(b.min(u32::MAX as u64) as u32)).hi * inv(self.j + 1);
                for m in 1..=self.j {
                    let cands = unimodal_candidates(m, r, a, b);
                    let peak = cands
                        .into_iter()
                        .map(|k| (binom(k, m) * Interval::point(r).powi((k - m as u64).min(u32::MAX as u64) as u32)).hi)
                        .fold(0.0, f64::max);
                    total += peak * inv(self.j - m + 1);
                }
                total
            }
        }
    }
}

fn unimodal_candidates(j: usize, r: f64, a: u64, b: u64) -> Vec<u64> {
    let mut cands = vec![a.max(j as u64), b.max(j as u64)];
    if r < 1.0 && r > 0.0 {
        let kstar = j as f64 / -r.ln();
        for k in [kstar.floor(), kstar.ceil()] {
            if k.is_finite() && k >= a as f64 && k <= b as f64 && k >= j as f64 {
                cands.push(k as u64);
            }
        }
    }
    cands
}

/// Binomial coefficient as an interval product (exact for small values).
pub fn binom(k: u64, j: usize) -> Interval {
    if (j as u64) > k {
        return Interval::ZERO;
    }
    let mut acc = Interval::ONE;
    for i in 0..j as u64 {
        acc = acc * Interval::point((k - i) as f64);
        acc = acc.checked_div(Interval::point((i + 1) as f64)).expect("positive divisor");
    }
    acc
}

/// `lambda^k` through the polar form: tight for large `k`.
pub fn cpow(lambda: Complex64, delta: f64, k: u64) -> CInterval {
    if k == 0 {
        return CInterval::ONE;
    }
    if k <= 24 {
        return CInterval::inflated(lambda, delta).powi(k);
    }
    let boxed = CInterval::inflated(lambda, delta);
    let r = boxed.modulus();
    let rk = r.powi(k.min(u32::MAX as u64) as u32);
    let theta = arg_enclosure(lambda, delta);
    let kt = theta.scale(k as f64);
    CInterval {
        re: rk * kt.cos(),
        im: rk * kt.sin(),
    }
}

/// Signed argument enclosure of an inflated eigenvalue box (assumed not
/// containing the origin).
fn arg_enclosure(lambda: Complex64, delta: f64) -> Interval {
    let corners = [
        Complex64::new(lambda.re - delta, lambda.im - delta),
        Complex64::new(lambda.re - delta, lambda.im + delta),
        Complex64::new(lambda.re + delta, lambda.im - delta),
        Complex64::new(lambda.re + delta, lambda.im + delta),
    ];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in corners {
        let t = c.im.atan2(c.re);
        lo = lo.min(t);
        hi = hi.max(t);
    }
    Interval::widened(lo, 4).hull(Interval::widened(hi, 4))
}

/// Geometric-sum entry for a real eigenvalue away from 1:
/// `F_j(k) = (1-l^k)(1-l)^-(j+1) - sum_m binom(k,m) l^(k-m) (1-l)^-(j-m+1)`.
pub(crate) fn geom_entry_real(lambda: Interval, j: usize, k: u64) -> Interval {
    let one_minus = Interval::ONE - lambda;
    let inv = |pow: usize| -> Interval {
        let mut acc = Interval::ONE;
        for _ in 0..pow {
            acc = acc.checked_div(one_minus).expect("lambda != 1 checked by caller");
        }
        acc
    };
    let lk = lambda.powi(k.min(u32::MAX as u64) as u32);
    let mut total = (Interval::ONE - lk) * inv(j + 1);
    for m in 1..=j {
        if k >= m as u64 {
            let term = binom(k, m) * lambda.powi((k - m as u64).min(u32::MAX as u64) as u32) * inv(j - m + 1);
            total -= term;
        }
    }
    total
}

pub(crate) fn geom_entry_complex(lambda: Complex64, delta: f64, j: usize, k: u64) -> CInterval {
    let lam = CInterval::inflated(lambda, delta);
    let one_minus = CInterval::ONE.sub(lam);
    let inv = |pow: usize| -> CInterval {
        let mut acc = CInterval::ONE;
        for _ in 0..pow {
            acc = acc.div(one_minus).expect("lambda != 1 checked by caller");
        }
        acc
    };
    let lk = cpow(lambda, delta, k);
    let mut total = (CInterval::ONE.sub(lk)).mul(inv(j + 1));
    for m in 1..=j {
        if k >= m as u64 {
            let term = cpow(lambda, delta, k - m as u64)
                .scale(binom(k, m))
                .mul(inv(j - m + 1));
            total = total.sub(term);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binom_exact_small() {
        assert_eq!(binom(5, 2).lo, 10.0);
        assert_eq!(binom(5, 2).hi, 10.0);
        assert_eq!(binom(3, 5).hi, 0.0);
    }

    #[test]
    fn geom_entry_matches_direct_sum() {
        // F_j(k) = sum_(t<k) binom(t,j) l^(t-j), oracle by direct summation
        for &l in &[0.5f64, -0.7, 2.0, 1.25] {
            for j in 0..3usize {
                for k in [1u64, 2, 5, 9, 17] {
                    let mut oracle = 0.0;
                    for t in 0..k {
                        if t >= j as u64 {
                            let mut c = 1.0;
                            for i in 0..j as u64 {
                                c = c * (t - i) as f64 / (i + 1) as f64;
                            }
                            oracle += c * l.powi((t - j as u64) as i32);
                        }
                    }
                    let got = geom_entry_real(Interval::point(l), j, k);
                    assert!(
                        got.contains(oracle) || (got.lo - oracle).abs() < 1e-9 * (1.0 + oracle.abs()),
                        "l={l} j={j} k={k}: {got:?} vs {oracle}"
                    );
                }
            }
        }
    }

    #[test]
    fn complex_geom_matches_direct_sum() {
        let l = Complex64::new(0.985, 0.069101);
        for k in [1u64, 8, 32] {
            let mut oracle = Complex64::new(0.0, 0.0);
            let mut p = Complex64::new(1.0, 0.0);
            for _ in 0..k {
                oracle += p;
                p *= l;
            }
            let got = geom_entry_complex(l, 0.0, 0, k);
            assert!(got.contains(oracle), "k={k}: {got:?} vs {oracle}");
        }
    }

    #[test]
    fn cpow_tight_for_large_k() {
        let l = Complex64::new(0.985, 0.069101);
        let z = cpow(l, 0.0, 32);
        let exact = l.powi(32);
        assert!(z.contains(exact));
        assert!(z.re.width() < 1e-10 && z.im.width() < 1e-10, "{z:?}");
    }
}
