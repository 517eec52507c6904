//! Crout reduction (LU without pivoting) for tridiagonal systems.
//!
//! The per-step Newton systems of the implicit schemes are strictly
//! diagonally dominant in the regimes of interest, so no pivoting is needed;
//! callers assert dominance before solving.

use thiserror::Error;

/// Pivot smaller than 1e-14 encountered during factorization.
#[derive(Debug, Error, PartialEq)]
#[error("zero pivot at row {row} of tridiagonal factorization (pivot {pivot:.3e})")]
pub struct ZeroPivot {
    pub row: usize,
    pub pivot: f64,
}

const PIVOT_FLOOR: f64 = 1e-14;

/// Reusable factorization buffers so the Newton loop does not allocate.
#[derive(Debug, Clone)]
pub struct CroutWorkspace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl CroutWorkspace {
    pub fn new(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            upper: vec![0.0; n.saturating_sub(1)],
        }
    }
}

/// Solve `A x = rhs` for tridiagonal `A` given as bands:
/// `sub[i] = A[i+1][i]`, `diag[i] = A[i][i]`, `sup[i] = A[i][i+1]`.
///
/// Crout factors A = L U with L lower bidiagonal and U unit upper bidiagonal,
/// then runs the forward and backward sweeps. Returns [`ZeroPivot`] when a
/// pivot magnitude falls below 1e-14.
pub fn crout_solve_with(
    ws: &mut CroutWorkspace,
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
    x: &mut [f64],
) -> Result<(), ZeroPivot> {
    let n = diag.len();
    assert!(n >= 1, "empty system");
    assert_eq!(rhs.len(), n);
    assert_eq!(x.len(), n);
    if n > 1 {
        assert_eq!(sub.len(), n - 1);
        assert_eq!(sup.len(), n - 1);
    }
    assert!(ws.lower.len() >= n && ws.upper.len() + 1 >= n);

    let lower = &mut ws.lower[..n];
    let upper = &mut ws.upper[..n.saturating_sub(1)];

    lower[0] = diag[0];
    if lower[0].abs() < PIVOT_FLOOR {
        return Err(ZeroPivot {
            row: 0,
            pivot: lower[0],
        });
    }
    if n > 1 {
        upper[0] = sup[0] / lower[0];
    }
    for i in 1..n {
        lower[i] = diag[i] - sub[i - 1] * upper[i - 1];
        if lower[i].abs() < PIVOT_FLOOR {
            return Err(ZeroPivot {
                row: i,
                pivot: lower[i],
            });
        }
        if i + 1 < n {
            upper[i] = sup[i] / lower[i];
        }
    }

    x[0] = rhs[0] / lower[0];
    for i in 1..n {
        x[i] = (rhs[i] - sub[i - 1] * x[i - 1]) / lower[i];
    }
    for i in (0..n - 1).rev() {
        x[i] -= upper[i] * x[i + 1];
    }
    Ok(())
}

/// Convenience wrapper allocating its own workspace and result.
pub fn crout_solve(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, ZeroPivot> {
    let mut ws = CroutWorkspace::new(diag.len());
    let mut x = vec![0.0; diag.len()];
    crout_solve_with(&mut ws, sub, diag, sup, rhs, &mut x)?;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Independent oracle: dense Gaussian elimination with partial pivoting.
    #[allow(clippy::needless_range_loop)]
    fn dense_solve(a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        let mut a = a;
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            for row in col + 1..n {
                let m = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= m * a[col][k];
                }
                b[row] -= m * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut s = b[row];
            for k in row + 1..n {
                s -= a[row][k] * x[k];
            }
            x[row] = s / a[row][row];
        }
        x
    }

    fn to_dense(sub: &[f64], diag: &[f64], sup: &[f64]) -> Vec<Vec<f64>> {
        let n = diag.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = diag[i];
            if i + 1 < n {
                a[i][i + 1] = sup[i];
                a[i + 1][i] = sub[i];
            }
        }
        a
    }

    #[test]
    fn identity_returns_rhs() {
        let rhs = vec![3.0, -1.0, 2.5, 0.0];
        let x = crout_solve(&[0.0; 3], &[1.0; 4], &[0.0; 3], &rhs).unwrap();
        assert_eq!(x, rhs);
    }

    #[test]
    fn known_three_by_three() {
        // diag 2, off -1, rhs (1,0,1) -> (1,1,1) by dense elimination.
        let x = crout_solve(&[-1.0, -1.0], &[2.0, 2.0, 2.0], &[-1.0, -1.0], &[1.0, 0.0, 1.0])
            .unwrap();
        for xi in x {
            assert!((xi - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn single_equation() {
        let x = crout_solve(&[], &[4.0], &[], &[2.0]).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_pivot_detected() {
        let err = crout_solve(&[1.0], &[0.0, 1.0], &[1.0], &[1.0, 1.0]).unwrap_err();
        assert_eq!(err.row, 0);
    }

    #[test]
    fn random_dominant_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 50;
        let sub: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sup: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let row_sum = (if i > 0 { sub[i - 1].abs() } else { 0.0 })
                    + (if i < n - 1 { sup[i].abs() } else { 0.0 });
                row_sum + rng.gen_range(0.5..2.0)
            })
            .collect();
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();

        let x = crout_solve(&sub, &diag, &sup, &rhs).unwrap();
        let oracle = dense_solve(to_dense(&sub, &diag, &sup), rhs.clone());
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            assert!((x[i] - oracle[i]).abs() <= 1e-10 * scale.max(1.0));
        }
    }
}
