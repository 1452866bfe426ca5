use super::imat::{imat_mul, imat_of, imat_sub, max_abs_hi, IMat};
use crate::error::{Error, Result};
use crate::numerics::{CInterval, Interval};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

/// One Jordan block of the realified decomposition.
///
/// For a conjugate pair the block is stored once with `lambda` the
/// representative of positive imaginary part; its realified form is a
/// `2*size x 2*size` matrix of rotation-scaling sub-blocks.
#[derive(Clone, Debug)]
pub struct JordanBlock {
    pub lambda: Complex64,
    pub size: usize,
    pub sigma_max: f64,
    pub is_conjugate_pair: bool,
}

impl JordanBlock {
    /// Rows occupied in the realified form.
    pub fn real_dim(&self) -> usize {
        if self.is_conjugate_pair {
            2 * self.size
        } else {
            self.size
        }
    }

    /// The realified block matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        realified_block(self.lambda, self.size, self.is_conjugate_pair)
    }
}

/// Certified real Jordan decomposition `A ~ S J S^-1`.
#[derive(Clone, Debug)]
pub struct JordanForm {
    pub s: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub s_inv: DMatrix<f64>,
    pub blocks: Vec<JordanBlock>,
    /// Upper bound on `|A - S J S^-1|` and `|S S^-1 - I|` (entrywise max).
    pub delta_max: f64,
}

impl JordanForm {
    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    /// Row offset of each block in the realified form.
    pub fn block_offsets(&self) -> Vec<usize> {
        let mut offs = Vec::with_capacity(self.blocks.len());
        let mut o = 0;
        for b in &self.blocks {
            offs.push(o);
            o += b.real_dim();
        }
        offs
    }

    /// 2-d rotation subspaces of the eigenbasis (one per conjugate pair
    /// chain position).
    pub fn paired_subspaces(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for (b, off) in self.blocks.iter().zip(self.block_offsets()) {
            if b.is_conjugate_pair {
                for j in 0..b.size {
                    pairs.push((off + 2 * j, off + 2 * j + 1));
                }
            }
        }
        pairs
    }

    /// Largest block norm, the contraction/divergence rate of the ball
    /// dynamics.
    pub fn sigma_max_overall(&self) -> f64 {
        self.blocks.iter().map(|b| b.sigma_max).fold(0.0, f64::max)
    }

    /// Upper bound on the spectral radius including the residual slack.
    pub fn spectral_radius_hi(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                CInterval::inflated(b.lambda, self.delta_max).modulus().hi
            })
            .fold(0.0, f64::max)
    }

    /// Does any eigenvalue range (inflated by the residual) touch 1?
    pub fn one_in_spectrum(&self) -> bool {
        let d = self.delta_max.max(1e-12);
        self.blocks
            .iter()
            .any(|b| (b.lambda.re - 1.0).abs() <= d && b.lambda.im.abs() <= d)
    }
}

/// Intermediate complex-space decomposition: Jordan chains per
/// representative eigenvalue, conjugate pairs matched and stored once.
pub struct ComplexJordan {
    source: DMatrix<f64>,
    /// (eigenvalue, chains ordered longest first, conjugate-pair flag)
    chains: Vec<(Complex64, Vec<Vec<CVec>>, bool)>,
}

/// Compute the real Jordan decomposition of `a` with clustering
/// tolerance `tol`, certifying the reconstruction residual.
pub fn jordan_decompose(a: &DMatrix<f64>, tol: f64) -> Result<JordanForm> {
    let cj = decompose_complex(a, tol)?;
    realify(&cj)
}

/// Interval-certified upper bound on `|A - S J S^-1|` (entrywise max).
pub fn reconstruction_error(
    a: &DMatrix<f64>,
    s: &DMatrix<f64>,
    j: &DMatrix<f64>,
    s_inv: &DMatrix<f64>,
) -> f64 {
    let prod = imat_mul(&imat_mul(&imat_of(s), &imat_of(j)), &imat_of(s_inv));
    max_abs_hi(&imat_sub(&imat_of(a), &prod))
}

fn identity_residual(s: &DMatrix<f64>, s_inv: &DMatrix<f64>) -> f64 {
    let p = s.nrows();
    let prod = imat_mul(&imat_of(s), &imat_of(s_inv));
    let eye: IMat = IMat::from_fn(p, p, |i, j| {
        Interval::point(if i == j { 1.0 } else { 0.0 })
    });
    max_abs_hi(&imat_sub(&prod, &eye))
}

/// Upper bound on the spectral norm of a block, via SVD with outward slack.
pub fn block_sigma_max(block: &JordanBlock) -> f64 {
    let m = block.matrix();
    let svd = m.svd(false, false);
    let s1 = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let lam_hi = CInterval::point(block.lambda).modulus().hi;
    (s1 * (1.0 + 1e-12) + f64::MIN_POSITIVE).max(lam_hi)
}

/// Replace conjugate eigenvalue pairs by 2x2 rotation-scaling blocks with
/// eigenvector columns split into real and imaginary parts, then
/// re-certify the residual.
pub fn realify(cj: &ComplexJordan) -> Result<JordanForm> {
    let p = cj.source.nrows();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(p);
    let mut blocks = Vec::new();

    for (lam, chains, pair) in &cj.chains {
        for chain in chains {
            let size = chain.len();
            if *pair {
                for c in chain {
                    cols.push(c.map(|z| z.re));
                    cols.push(c.map(|z| z.im));
                }
            } else {
                for c in chain {
                    cols.push(c.map(|z| z.re));
                }
            }
            let mut b = JordanBlock {
                lambda: *lam,
                size,
                sigma_max: 0.0,
                is_conjugate_pair: *pair,
            };
            b.sigma_max = block_sigma_max(&b);
            blocks.push(b);
        }
    }

    if cols.len() != p {
        return Err(Error::Decomposition(format!(
            "chain columns span {} of {} dimensions",
            cols.len(),
            p
        )));
    }

    let s = DMatrix::from_columns(&cols);
    let s_inv = s
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Decomposition("singular eigenvector matrix".into()))?;

    let mut j = DMatrix::zeros(p, p);
    let mut off = 0;
    for b in &blocks {
        let bm = b.matrix();
        let d = b.real_dim();
        j.view_mut((off, off), (d, d)).copy_from(&bm);
        off += d;
    }

    let delta_max = reconstruction_error(&cj.source, &s, &j, &s_inv)
        .max(identity_residual(&s, &s_inv));
    if !delta_max.is_finite() {
        return Err(Error::Decomposition("non-finite residual".into()));
    }

    Ok(JordanForm {
        s,
        j,
        s_inv,
        blocks,
        delta_max,
    })
}

fn realified_block(lambda: Complex64, size: usize, pair: bool) -> DMatrix<f64> {
    if pair {
        let d = 2 * size;
        let mut m = DMatrix::zeros(d, d);
        for k in 0..size {
            m[(2 * k, 2 * k)] = lambda.re;
            m[(2 * k, 2 * k + 1)] = lambda.im;
            m[(2 * k + 1, 2 * k)] = -lambda.im;
            m[(2 * k + 1, 2 * k + 1)] = lambda.re;
            if k + 1 < size {
                m[(2 * k, 2 * k + 2)] = 1.0;
                m[(2 * k + 1, 2 * k + 3)] = 1.0;
            }
        }
        m
    } else {
        let mut m = DMatrix::zeros(size, size);
        for k in 0..size {
            m[(k, k)] = lambda.re;
            if k + 1 < size {
                m[(k, k + 1)] = 1.0;
            }
        }
        m
    }
}

// ---------------------------------------------------------------------
// complex-space decomposition
// ---------------------------------------------------------------------

fn decompose_complex(a: &DMatrix<f64>, tol: f64) -> Result<ComplexJordan> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension {
            context: "jordan_decompose".into(),
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    if tol <= 0.0 {
        return Err(Error::Numeric("clustering tolerance must be positive".into()));
    }
    let p = a.nrows();
    let scale = a.iter().map(|x| x.abs()).fold(1.0, f64::max);

    let eigs = a.clone().complex_eigenvalues();

    let ctol0 = tol * scale;
    match try_chains(a, &eigs, ctol0, scale) {
        Ok(c) => Ok(c),
        Err(_) => {
            // Near-defective spectra scatter computed eigenvalues by roughly
            // eps^(1/p); widen the clusters once before giving up.
            let ctol1 = (ctol0 * 100.0).max(f64::EPSILON.powf(1.0 / p as f64) * 10.0 * scale);
            try_chains(a, &eigs, ctol1, scale)
        }
    }
}

struct Cluster {
    mean: Complex64,
    count: usize,
}

fn cluster_eigs(eigs: &[Complex64], ctol: f64) -> Vec<Cluster> {
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for &e in eigs {
        match clusters
            .iter_mut()
            .find(|(sum, n)| (*sum / *n as f64 - e).norm() <= ctol)
        {
            Some((sum, n)) => {
                *sum += e;
                *n += 1;
            }
            None => clusters.push((e, 1)),
        }
    }
    clusters
        .into_iter()
        .map(|(sum, n)| Cluster {
            mean: sum / n as f64,
            count: n,
        })
        .collect()
}

fn try_chains(
    a: &DMatrix<f64>,
    eigs: &DVector<Complex64>,
    ctol: f64,
    scale: f64,
) -> Result<ComplexJordan> {
    let p = a.nrows();
    let eigs: Vec<Complex64> = eigs.iter().cloned().collect();
    let mut clusters = cluster_eigs(&eigs, ctol);

    // snap near-real clusters onto the axis
    for c in &mut clusters {
        if c.mean.im.abs() <= ctol {
            c.mean.im = 0.0;
        }
    }

    // match conjugate pairs; keep the Im > 0 representative
    let mut items: Vec<(Complex64, usize, bool)> = Vec::new(); // (lambda, mult, pair)
    let mut used = vec![false; clusters.len()];
    for i in 0..clusters.len() {
        if used[i] {
            continue;
        }
        let ci = &clusters[i];
        if ci.mean.im == 0.0 {
            items.push((ci.mean, ci.count, false));
            used[i] = true;
        } else {
            let conj = ci.mean.conj();
            let Some(jx) = (0..clusters.len())
                .find(|&jx| !used[jx] && jx != i && (clusters[jx].mean - conj).norm() <= 2.0 * ctol)
            else {
                return Err(Error::Decomposition(format!(
                    "unmatched conjugate eigenvalue {}",
                    ci.mean
                )));
            };
            if clusters[jx].count != ci.count {
                return Err(Error::Decomposition(
                    "conjugate clusters of different multiplicity".into(),
                ));
            }
            let lam = Complex64::new(
                0.5 * (ci.mean.re + clusters[jx].mean.re),
                0.5 * (ci.mean.im.abs() + clusters[jx].mean.im.abs()),
            );
            items.push((lam, ci.count, true));
            used[i] = true;
            used[jx] = true;
        }
    }

    // deterministic ordering: descending modulus, then real part
    items.sort_by(|x, y| {
        (y.0.norm(), y.0.re, y.0.im)
            .partial_cmp(&(x.0.norm(), x.0.re, x.0.im))
            .unwrap()
    });

    let ac = CMat::from_fn(p, p, |i, j| Complex64::new(a[(i, j)], 0.0));
    let rank_tol = (ctol * (p as f64).sqrt()).max(1e-10 * scale);

    let mut chains_all = Vec::new();
    let mut total = 0usize;
    for (lam, mult, pair) in items {
        let chains = jordan_chains(&ac, lam, mult, rank_tol)?;
        total += chains.iter().map(|c| c.len()).sum::<usize>() * if pair { 2 } else { 1 };
        chains_all.push((lam, chains, pair));
    }
    if total != p {
        return Err(Error::Decomposition(format!(
            "eigenvector span {total} of {p}"
        )));
    }

    Ok(ComplexJordan {
        source: a.clone(),
        chains: chains_all,
    })
}

/// Jordan chains for one eigenvalue: nullity profile of `(A - lambda I)^k`
/// fixes the block sizes, then heads are picked independent of lower
/// nullspaces and of longer chains mapped down.
fn jordan_chains(
    ac: &CMat,
    lambda: Complex64,
    mult: usize,
    rank_tol: f64,
) -> Result<Vec<Vec<CVec>>> {
    let p = ac.nrows();
    let m = {
        let mut m = ac.clone();
        for i in 0..p {
            m[(i, i)] -= lambda;
        }
        m
    };

    // nullspace bases of M^k for k = 1.. until the full multiplicity is seen
    let mut bases: Vec<Vec<CVec>> = vec![Vec::new()]; // index 0: null(M^0) = {}
    let mut pow = m.clone();
    loop {
        let basis = nullspace(&pow, rank_tol);
        let nullity = basis.len();
        let prev = bases.last().unwrap().len();
        if nullity <= prev {
            return Err(Error::Decomposition(format!(
                "nullity stalled at {nullity} (multiplicity {mult}) for eigenvalue {lambda}"
            )));
        }
        bases.push(basis);
        if nullity >= mult {
            break;
        }
        if bases.len() > mult + 1 {
            return Err(Error::Decomposition(
                "chain length exceeds multiplicity".into(),
            ));
        }
        pow = &pow * &m;
    }

    let kmax = bases.len() - 1;
    let nullity = |k: usize| -> usize {
        if k <= kmax {
            bases[k].len()
        } else {
            bases[kmax].len()
        }
    };
    // d_k = blocks of size >= k
    let d = |k: usize| nullity(k) - nullity(k - 1);

    let mut heads: Vec<(usize, CVec)> = Vec::new();
    for s in (1..=kmax).rev() {
        let need = d(s) - if s + 1 <= kmax { d(s + 1) } else { 0 };
        if need == 0 {
            continue;
        }
        // avoid-space: null(M^{s-1}) plus longer heads mapped to level s
        let mut avoid: Vec<CVec> = bases[s - 1].clone();
        for (t, h) in &heads {
            let mut v = h.clone();
            for _ in 0..(t - s) {
                v = &m * v;
            }
            avoid.push(v);
        }
        let mut avoid_on = orthonormalize(&avoid);
        let mut picked = 0;
        // rank candidates by independence residual, take the best
        let mut cands: Vec<(f64, CVec)> = bases[s]
            .iter()
            .map(|v| {
                let r = residual(v, &avoid_on);
                (r.norm(), r)
            })
            .collect();
        cands.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
        for (rn, r) in cands {
            if picked == need {
                break;
            }
            if rn < 1e-6 {
                break;
            }
            let h = r.clone() / Complex64::new(rn, 0.0);
            avoid_on.push(h.clone());
            heads.push((s, h));
            picked += 1;
        }
        if picked != need {
            return Err(Error::Decomposition(format!(
                "could not build {need} chains of length {s} for eigenvalue {lambda}"
            )));
        }
    }

    // expand heads into chains, eigenvector first, canonically normalized
    let mut chains = Vec::new();
    heads.sort_by(|x, y| y.0.cmp(&x.0));
    for (s, h) in heads {
        let mut chain = vec![h];
        for _ in 1..s {
            let next = &m * chain.last().unwrap();
            chain.push(next);
        }
        chain.reverse(); // eigenvector first
        let eig = &chain[0];
        let nrm = eig.norm();
        if nrm < 1e-300 {
            return Err(Error::Decomposition("vanishing chain eigenvector".into()));
        }
        // phase: largest-magnitude eigenvector component made real-positive
        let imax = (0..p)
            .max_by(|&i, &j| eig[i].norm().partial_cmp(&eig[j].norm()).unwrap())
            .unwrap();
        let phase = eig[imax].conj() / eig[imax].norm();
        let sc = phase / Complex64::new(nrm, 0.0);
        for c in &mut chain {
            *c *= sc;
        }
        chains.push(chain);
    }
    Ok(chains)
}

fn nullspace(m: &CMat, rank_tol: f64) -> Vec<CVec> {
    let p = m.nrows();
    let svd = m.clone().svd(false, true);
    let sv = &svd.singular_values;
    let v_t = svd.v_t.expect("svd with v requested");
    let cutoff = rank_tol.max(sv.iter().cloned().fold(0.0, f64::max) * 1e-13);
    let mut basis = Vec::new();
    for i in 0..p {
        if sv[i] <= cutoff {
            basis.push(v_t.row(i).transpose().map(|z| z.conj()));
        }
    }
    basis
}

fn orthonormalize(vs: &[CVec]) -> Vec<CVec> {
    let mut out: Vec<CVec> = Vec::new();
    for v in vs {
        let r = residual(v, &out);
        let n = r.norm();
        if n > 1e-12 {
            out.push(r / Complex64::new(n, 0.0));
        }
    }
    out
}

fn residual(v: &CVec, basis: &[CVec]) -> CVec {
    let mut r = v.clone();
    for _ in 0..2 {
        // twice for numerical orthogonality
        for b in basis {
            let coef = b.dotc(&r);
            r -= b * coef;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn thermostat() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.97, 0.1, -0.05, 1.0])
    }

    #[test]
    fn identity_is_its_own_form() {
        let a = DMatrix::<f64>::identity(2, 2);
        let jf = jordan_decompose(&a, 1e-8).unwrap();
        assert!(jf.delta_max < 1e-14);
        assert_relative_eq!(jf.j, a, epsilon = 1e-12);
        assert_eq!(jf.blocks.len(), 2);
    }

    #[test]
    fn thermostat_matches_reported_form() {
        let a = thermostat();
        let jf = jordan_decompose(&a, 1e-8).unwrap();
        assert!(jf.delta_max < 1e-9, "delta_max = {}", jf.delta_max);
        assert_eq!(jf.blocks.len(), 1);
        let b = &jf.blocks[0];
        assert!(b.is_conjugate_pair && b.size == 1);
        // J = [[0.985, 0.069], [-0.069, 0.985]] to three decimals
        assert_relative_eq!(jf.j[(0, 0)], 0.985, epsilon = 5e-4);
        assert_relative_eq!(jf.j[(0, 1)], 0.0691, epsilon = 5e-4);
        assert_relative_eq!(jf.j[(1, 0)], -0.0691, epsilon = 5e-4);
        // |lambda| = sqrt(0.975)
        assert_relative_eq!(b.lambda.norm(), 0.975f64.sqrt(), epsilon = 1e-12);
        // sigma of a rotation-scaling block is |lambda|
        assert_relative_eq!(b.sigma_max, 0.975f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn reconstruction_error_detects_perturbation() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        let jf = jordan_decompose(&a, 1e-8).unwrap();
        assert!(jf.delta_max < 1e-13);
        let mut s = jf.s.clone();
        s[(0, 0)] += 1e-6;
        let e = reconstruction_error(&a, &s, &jf.j, &jf.s_inv);
        assert!(e >= 1e-7, "perturbed residual {e}");
    }

    #[test]
    fn pure_rotation_pair() {
        // eigenvalues +-i
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let jf = jordan_decompose(&a, 1e-8).unwrap();
        let b = &jf.blocks[0];
        assert!(b.is_conjugate_pair);
        assert_relative_eq!(b.lambda.re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(b.lambda.im, 1.0, epsilon = 1e-12);
        // realified block is the +-pi/2 rotation with our column convention
        assert_relative_eq!(jf.j[(0, 0)], 0.0, epsilon = 1e-12);
        assert_relative_eq!(jf.j[(0, 1)].abs(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(jf.j[(1, 0)].abs(), 1.0, epsilon = 1e-12);
        assert!(jf.j[(0, 1)] * jf.j[(1, 0)] < 0.0, "antisymmetric off-diagonal");
        assert!(jf.delta_max < 1e-12);
    }

    #[test]
    fn defective_integrator_chain() {
        // lambda = 1 with a 2-chain
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let jf = jordan_decompose(&a, 1e-8).unwrap();
        assert_eq!(jf.blocks.len(), 1);
        assert_eq!(jf.blocks[0].size, 2);
        assert!(jf.delta_max < 1e-12);
        // sigma of [[1,1],[0,1]] is the golden ratio
        assert_relative_eq!(
            jf.blocks[0].sigma_max,
            (1.0 + 5f64.sqrt()) / 2.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn nilpotent_block_sigma() {
        let b = JordanBlock {
            lambda: Complex64::new(0.0, 0.0),
            size: 2,
            sigma_max: 0.0,
            is_conjugate_pair: false,
        };
        assert_relative_eq!(block_sigma_max(&b), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn scalar_block_sigma_is_modulus() {
        let b = JordanBlock {
            lambda: Complex64::new(0.5, 0.0),
            size: 1,
            sigma_max: 0.0,
            is_conjugate_pair: false,
        };
        assert_relative_eq!(block_sigma_max(&b), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn random_diagonalizable_certified() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for dim in [2usize, 3, 4, 6, 8] {
            for _ in 0..8 {
                let a = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
                match jordan_decompose(&a, 1e-8) {
                    Ok(jf) => {
                        let r = reconstruction_error(&a, &jf.s, &jf.j, &jf.s_inv);
                        assert!(
                            r <= jf.delta_max * (1.0 + 1e-12) + 1e-300,
                            "residual {r} above certificate {}",
                            jf.delta_max
                        );
                        assert!(jf.delta_max < 1e-6, "dim {dim}: delta {}", jf.delta_max);
                    }
                    Err(e) => panic!("dim {dim}: {e}"),
                }
            }
        }
    }

    #[test]
    fn block_norm_dominates_block_action() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let blocks = vec![
            JordanBlock {
                lambda: Complex64::new(0.9, 0.0),
                size: 3,
                sigma_max: 0.0,
                is_conjugate_pair: false,
            },
            JordanBlock {
                lambda: Complex64::new(0.8, 0.55),
                size: 2,
                sigma_max: 0.0,
                is_conjugate_pair: true,
            },
        ];
        for b in blocks {
            let sig = block_sigma_max(&b);
            let m = b.matrix();
            for _ in 0..1000 {
                let u = DVector::from_fn(m.nrows(), |_, _| rng.gen_range(-1.0..1.0));
                assert!((&m * &u).norm() <= sig * u.norm() * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn eigenvalues_match_char_poly_roots_2d() {
        // companion matrix of x^2 - x - 1: roots are golden ratios
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        let jf = jordan_decompose(&a, 1e-8).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let got: Vec<f64> = jf.blocks.iter().map(|b| b.lambda.re).collect();
        assert_relative_eq!(got[0], phi, epsilon = 1e-9);
        assert_relative_eq!(got[1], 1.0 - phi, epsilon = 1e-9);
    }
}
