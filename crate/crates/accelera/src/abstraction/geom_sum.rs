use super::shape::{geom_entry_complex, geom_entry_real};
use super::Horizon;
use crate::error::{Error, Result};
use crate::linalg::{imat_mul, imat_of, IMat, JordanForm};
use crate::numerics::{CInterval, Interval};

/// `(I - A^n)(I - A)^-1 = sum_(k<n) A^k` assembled through the Jordan
/// factors as an interval matrix. `lambda = 1` entries take the value `n`
/// (finite horizons only); non-trivial blocks are summed directly for
/// moderate horizons, which sidesteps the closed form's corner cases, and
/// use the per-entry closed form beyond.
pub fn geometric_sum_matrix(jf: &JordanForm, horizon: Horizon) -> Result<IMat> {
    let p = jf.dim();
    let mut g = IMat::from_element(p, p, Interval::ZERO);
    let offsets = jf.block_offsets();
    for (b, off) in jf.blocks.iter().zip(offsets) {
        let delta = jf.delta_max;
        let lam = b.lambda;
        let is_one = !b.is_conjugate_pair && (lam.re - 1.0).abs() <= delta.max(1e-12);
        if is_one {
            match horizon {
                Horizon::Infinite => {
                    return Err(Error::Divergence(
                        "geometric sum with eigenvalue 1 over an unbounded horizon".into(),
                    ))
                }
                Horizon::Finite(n) => {
                    if b.size == 1 {
                        let v = Interval::point(n as f64)
                            + Interval::new(-delta, delta).scale(n as f64);
                        g[(off, off)] = v;
                        continue;
                    }
                }
            }
        }
        if !is_one {
            let r_hi = CInterval::inflated(lam, delta).modulus().hi;
            if matches!(horizon, Horizon::Infinite) && r_hi >= 1.0 {
                return Err(Error::Divergence(format!(
                    "geometric sum diverges: |lambda| = {r_hi} >= 1"
                )));
            }
        }

        let direct_cap = 10_000;
        match horizon {
            Horizon::Finite(n) if b.size > 1 && n <= direct_cap => {
                // direct interval summation of block powers
                let d = b.real_dim();
                let bm = imat_of(&b.matrix());
                let mut acc = IMat::from_element(d, d, Interval::ZERO);
                let mut pw = IMat::from_fn(d, d, |i, j| {
                    Interval::point(if i == j { 1.0 } else { 0.0 })
                });
                for _ in 0..n {
                    for i in 0..d {
                        for jx in 0..d {
                            acc[(i, jx)] += pw[(i, jx)];
                        }
                    }
                    pw = imat_mul(&pw, &bm);
                }
                g.view_mut((off, off), (d, d)).copy_from(&acc);
            }
            _ => {
                // per-entry closed form (covers size-1 and large horizons)
                for j in 0..b.size {
                    if b.is_conjugate_pair {
                        let z = match horizon {
                            Horizon::Finite(n) => geom_entry_complex(lam, delta, j, n),
                            Horizon::Infinite => {
                                let one_minus =
                                    CInterval::ONE.sub(CInterval::inflated(lam, delta));
                                let mut acc = CInterval::ONE;
                                for _ in 0..=j {
                                    acc = acc.div(one_minus)?;
                                }
                                acc
                            }
                        };
                        for r in 0..(b.size - j) {
                            let (ro, co) = (off + 2 * r, off + 2 * (r + j));
                            g[(ro, co)] = z.re;
                            g[(ro, co + 1)] = z.im;
                            g[(ro + 1, co)] = -z.im;
                            g[(ro + 1, co + 1)] = z.re;
                        }
                    } else {
                        let lam_iv =
                            Interval::new(lam.re - delta, lam.re + delta);
                        let v = match horizon {
                            Horizon::Finite(n) => geom_entry_real(lam_iv, j, n),
                            Horizon::Infinite => {
                                let one_minus = Interval::ONE - lam_iv;
                                let mut acc = Interval::ONE;
                                for _ in 0..=j {
                                    acc = acc.checked_div(one_minus)?;
                                }
                                acc
                            }
                        };
                        for r in 0..(b.size - j) {
                            g[(off + r, off + r + j)] = v;
                        }
                    }
                }
            }
        }
    }
    Ok(imat_mul(
        &imat_mul(&imat_of(&jf.s), &g),
        &imat_of(&jf.s_inv),
    ))
}
