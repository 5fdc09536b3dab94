//! Small dense helpers for the 4x4 systems arising in the bias adjustment and
//! the HAR normal equations: Gaussian elimination with partial pivoting, a
//! 1-norm condition estimate, and a Jacobi eigendecomposition used for
//! minimum-norm solutions of near-singular symmetric systems.

use crate::error::{ArgiError, Result};

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite pivot"))
            .expect("non-empty");
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(ArgiError::Singular(format!(
                "zero pivot in column {col}"
            )));
        }
        m.swap(col, pivot_row);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = m[row][n];
        for c in (row + 1)..n {
            s -= m[row][c] * x[c];
        }
        x[row] = s / m[row][row];
    }
    Ok(x)
}

fn norm1(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    (0..n)
        .map(|c| a.iter().map(|row| row[c].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// 1-norm condition number estimate via the explicit inverse (fine at n <= 4).
pub fn cond1(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut inv_cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        match solve(a, &e) {
            Ok(col) => inv_cols.push(col),
            Err(_) => return f64::INFINITY,
        }
    }
    let inv: Vec<Vec<f64>> = (0..n)
        .map(|r| (0..n).map(|c| inv_cols[c][r]).collect())
        .collect();
    norm1(a) * norm1(&inv)
}

/// Jacobi eigendecomposition of a symmetric matrix; returns (eigenvalues,
/// eigenvectors as columns).
pub fn sym_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..100 {
        let mut off = 0.0;
        let (mut p, mut q) = (0, 1);
        for i in 0..n {
            for j in (i + 1)..n {
                if m[i][j].abs() > off {
                    off = m[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if off < 1e-14 {
            break;
        }
        let apq = m[p][q];
        let app = m[p][p];
        let aqq = m[q][q];
        let theta = 0.5 * (aqq - app) / apq;
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        for k in 0..n {
            let mkp = m[k][p];
            let mkq = m[k][q];
            m[k][p] = c * mkp - s * mkq;
            m[k][q] = s * mkp + c * mkq;
        }
        for k in 0..n {
            let mpk = m[p][k];
            let mqk = m[q][k];
            m[p][k] = c * mpk - s * mqk;
            m[q][k] = s * mpk + c * mqk;
        }
        for k in 0..n {
            let vkp = v[k][p];
            let vkq = v[k][q];
            v[k][p] = c * vkp - s * vkq;
            v[k][q] = s * vkp + c * vkq;
        }
    }
    let eig = (0..n).map(|i| m[i][i]).collect();
    (eig, v)
}

/// Minimum-norm solution of a symmetric system via the pseudo-inverse,
/// dropping eigenvalues below `rel_tol` times the largest.
pub fn solve_min_norm(a: &[Vec<f64>], b: &[f64], rel_tol: f64) -> Vec<f64> {
    let n = a.len();
    let (eig, vec) = sym_eigen(a);
    let max_eig = eig.iter().fold(0.0f64, |acc, &e| acc.max(e.abs()));
    let mut x = vec![0.0; n];
    if max_eig == 0.0 {
        return x;
    }
    for (k, &e) in eig.iter().enumerate() {
        if e.abs() <= rel_tol * max_eig {
            continue;
        }
        let proj: f64 = (0..n).map(|i| vec[i][k] * b[i]).sum();
        let scale = proj / e;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += scale * vec[i][k];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = vec![
            vec![4.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ];
        let b = vec![1.0, 2.0, 3.0];
        let x = solve(&a, &b).unwrap();
        for i in 0..3 {
            let got: f64 = (0..3).map(|j| a[i][j] * x[j]).sum();
            assert!((got - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_detected() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve(&a, &[1.0, 2.0]).is_err());
        assert!(cond1(&a).is_infinite());
    }

    #[test]
    fn condition_of_identity() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!((cond1(&a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_of_diagonal() {
        let a = vec![vec![3.0, 0.0], vec![0.0, 1.0]];
        let (mut eig, _) = sym_eigen(&a);
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn min_norm_on_rank_deficient_system() {
        // rows identical: solutions form a line; the min-norm one is symmetric
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let x = solve_min_norm(&a, &[2.0, 2.0], 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-10);
        assert!((x[1] - 1.0).abs() < 1e-10);
    }
}
