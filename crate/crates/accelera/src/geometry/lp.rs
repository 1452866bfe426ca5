//! Dense two-phase primal simplex for the small LPs behind support
//! evaluation: maximize `c.x` subject to `C x <= d` with free variables.
//!
//! Bland's rule keeps the pivoting cycle-free; callers certify the
//! returned vertex with interval arithmetic.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal { x: DVector<f64>, objective: f64 },
    Unbounded,
    Infeasible,
}

pub fn solve_max(obj: &DVector<f64>, cons: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<LpOutcome> {
    let r = cons.nrows();
    let p = cons.ncols();
    if obj.len() != p || rhs.len() != r {
        return Err(Error::Dimension {
            context: "lp".into(),
            expected: p,
            got: obj.len(),
        });
    }
    if r == 0 {
        // no constraints: unbounded unless the objective is zero
        return Ok(if obj.iter().all(|&c| c == 0.0) {
            LpOutcome::Optimal {
                x: DVector::zeros(p),
                objective: 0.0,
            }
        } else {
            LpOutcome::Unbounded
        });
    }

    // columns: x+ (p) | x- (p) | slack (r) | artificial (n_art)
    let mut need_art = vec![false; r];
    for i in 0..r {
        if rhs[i] < 0.0 {
            need_art[i] = true;
        }
    }
    let n_art = need_art.iter().filter(|&&b| b).count();
    let n = 2 * p + r + n_art;

    // tableau rows: r constraint rows, one objective row appended per phase
    let mut t = DMatrix::<f64>::zeros(r, n + 1);
    let mut basis = vec![0usize; r];
    let mut art_col = 2 * p + r;
    for i in 0..r {
        let sgn = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..p {
            t[(i, j)] = sgn * cons[(i, j)];
            t[(i, p + j)] = -sgn * cons[(i, j)];
        }
        t[(i, 2 * p + i)] = sgn; // slack
        t[(i, n)] = sgn * rhs[i];
        if need_art[i] {
            t[(i, art_col)] = 1.0;
            basis[i] = art_col;
            art_col += 1;
        } else {
            basis[i] = 2 * p + i;
        }
    }

    let scale = cons.iter().fold(1.0f64, |m, &x| m.max(x.abs()));
    let tol = 1e-11 * scale.max(rhs.iter().fold(1.0, |m, &x| m.max(x.abs())));

    if n_art > 0 {
        // phase 1: minimize artificial sum == maximize -(sum of artificials)
        let mut cost = vec![0.0; n];
        for (i, &b) in basis.iter().enumerate() {
            if b >= 2 * p + r {
                let _ = i;
                cost[b] = -1.0;
            }
        }
        let feasible = run_simplex(&mut t, &mut basis, &cost, n, n, tol)?;
        let art_val: f64 = basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= 2 * p + r)
            .map(|(i, _)| t[(i, n)])
            .sum();
        if !feasible || art_val > 1e-7 * (1.0 + scale) {
            return Ok(LpOutcome::Infeasible);
        }
        // drive leftover artificials out of the basis where possible
        for i in 0..r {
            if basis[i] >= 2 * p + r {
                if let Some(j) = (0..2 * p + r).find(|&j| t[(i, j)].abs() > tol) {
                    pivot(&mut t, &mut basis, i, j, n);
                }
            }
        }
    }

    // phase 2: maximize obj . (x+ - x-); artificial columns frozen
    let mut cost = vec![0.0; n];
    for j in 0..p {
        cost[j] = obj[j];
        cost[p + j] = -obj[j];
    }
    // artificial columns are barred from re-entering
    let bounded = run_simplex(&mut t, &mut basis, &cost, 2 * p + r, n, tol)?;
    if !bounded {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = DVector::zeros(p);
    for (i, &b) in basis.iter().enumerate() {
        if b < p {
            x[b] += t[(i, n)];
        } else if b < 2 * p {
            x[b - p] -= t[(i, n)];
        }
    }
    let objective = obj.dot(&x);
    Ok(LpOutcome::Optimal { x, objective })
}

/// Primal simplex iterations with Bland's rule. Returns false when the
/// problem is unbounded in the current cost.
fn run_simplex(
    t: &mut DMatrix<f64>,
    basis: &mut [usize],
    cost: &[f64],
    n_enter: usize,
    n: usize,
    tol: f64,
) -> Result<bool> {
    let r = t.nrows();
    let max_iters = 2000 + 200 * (n + r);
    let mut in_basis = vec![false; n];
    for _ in 0..max_iters {
        for f in in_basis.iter_mut() {
            *f = false;
        }
        for &b in basis.iter() {
            in_basis[b] = true;
        }
        // reduced costs: c_j - c_B . B^-1 A_j  (tableau is already B^-1 A)
        let mut entering = None;
        for j in 0..n_enter {
            if in_basis[j] {
                continue;
            }
            let mut red = cost[j];
            for i in 0..r {
                let tij = t[(i, j)];
                if tij != 0.0 {
                    red -= cost[basis[i]] * tij;
                }
            }
            if red > tol {
                entering = Some(j); // Bland: first improving index
                break;
            }
        }
        let Some(j) = entering else {
            return Ok(true);
        };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..r {
            let a = t[(i, j)];
            if a > tol {
                let ratio = t[(i, n)] / a;
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && basis[i] < basis[li]) {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((i, _)) = leave else {
            return Ok(false); // unbounded
        };
        pivot(t, basis, i, j, n);
    }
    Err(Error::Numeric("simplex iteration limit".into()))
}

fn pivot(t: &mut DMatrix<f64>, basis: &mut [usize], row: usize, col: usize, n: usize) {
    let r = t.nrows();
    let piv = t[(row, col)];
    for j in 0..=n {
        t[(row, j)] /= piv;
    }
    for i in 0..r {
        if i != row {
            let f = t[(i, col)];
            if f != 0.0 {
                for j in 0..=n {
                    t[(i, j)] -= f * t[(row, j)];
                }
            }
        }
    }
    basis[row] = col;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_support() {
        // max x1 over [-1,1]^2
        let c = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        let d = DVector::from_row_slice(&[1.0, 1.0, 1.0, 1.0]);
        let obj = DVector::from_row_slice(&[1.0, 0.0]);
        match solve_max(&obj, &c, &d).unwrap() {
            LpOutcome::Optimal { objective, .. } => assert!((objective - 1.0).abs() < 1e-9),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn negative_rhs_needs_phase1() {
        // x >= 2, x <= 5: max -x = -2
        let c = DMatrix::from_row_slice(2, 1, &[-1.0, 1.0]);
        let d = DVector::from_row_slice(&[-2.0, 5.0]);
        let obj = DVector::from_row_slice(&[-1.0]);
        match solve_max(&obj, &c, &d).unwrap() {
            LpOutcome::Optimal { objective, .. } => assert!((objective + 2.0).abs() < 1e-9),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn infeasible_detected() {
        // x <= -1 and x >= 1
        let c = DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let d = DVector::from_row_slice(&[-1.0, -1.0]);
        let obj = DVector::from_row_slice(&[1.0]);
        assert!(matches!(
            solve_max(&obj, &c, &d).unwrap(),
            LpOutcome::Infeasible
        ));
    }

    #[test]
    fn unbounded_detected() {
        // only x <= 1 binds from above in direction -x
        let c = DMatrix::from_row_slice(1, 1, &[1.0]);
        let d = DVector::from_row_slice(&[1.0]);
        let obj = DVector::from_row_slice(&[-1.0]);
        assert!(matches!(
            solve_max(&obj, &c, &d).unwrap(),
            LpOutcome::Unbounded
        ));
    }

    #[test]
    fn degenerate_vertices_terminate() {
        // redundant constraints through the same vertex
        let c = DMatrix::from_row_slice(5, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 2.0, -1.0, 0.0]);
        let d = DVector::from_row_slice(&[1.0, 1.0, 2.0, 4.0, 0.0]);
        let obj = DVector::from_row_slice(&[1.0, 1.0]);
        match solve_max(&obj, &c, &d).unwrap() {
            LpOutcome::Optimal { objective, .. } => assert!((objective - 2.0).abs() < 1e-9),
            o => panic!("{o:?}"),
        }
    }
}
