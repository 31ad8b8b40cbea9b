//! Dense helpers on row-major `Vec<f64>` matrices: rank by Gaussian
//! elimination, linear solves and Cholesky factorization.

/// Numerical rank of the `rows × cols` matrix `m` by Gaussian elimination
/// with partial pivoting. A pivot counts as zero when its magnitude is below
/// `threshold`.
pub fn rank(m: &[f64], rows: usize, cols: usize, threshold: f64) -> usize {
    assert_eq!(m.len(), rows * cols);
    let mut a = m.to_vec();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let (piv, best) = (rank..rows)
            .map(|r| (r, a[r * cols + col].abs()))
            .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= threshold {
            continue;
        }
        if piv != rank {
            for c in 0..cols {
                a.swap(piv * cols + c, rank * cols + c);
            }
        }
        let p = a[rank * cols + col];
        for r in (rank + 1)..rows {
            let factor = a[r * cols + col] / p;
            if factor == 0.0 {
                continue;
            }
            for c in col..cols {
                a[r * cols + c] -= factor * a[rank * cols + c];
            }
        }
        rank += 1;
    }
    rank
}

/// Solves `A x = b` for square `A` (n × n) by Gaussian elimination with
/// partial pivoting. Returns `None` for a (numerically) singular matrix.
pub fn solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .unwrap();
        if m[piv * n + col].abs() <= 1e-300_f64.max(f64::EPSILON * 1e-3 * scale) {
            return None;
        }
        if piv != col {
            for c in 0..n {
                m.swap(piv * n + c, col * n + c);
            }
            x.swap(piv, col);
        }
        for r in (col + 1)..n {
            let f = m[r * n + col] / m[col * n + col];
            for c in col..n {
                m[r * n + c] -= f * m[col * n + c];
            }
            x[r] -= f * x[col];
        }
    }
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|c| m[r * n + c] * x[c]).sum();
        x[r] = (x[r] - s) / m[r * n + r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Lower Cholesky factor of a symmetric positive definite matrix, or `None`
/// if the matrix is not (numerically) positive definite.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            if i == j {
                let d = a[i * n + i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i * n + i] = d.sqrt();
            } else {
                l[i * n + j] = (a[i * n + j] - s) / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Inverse of a symmetric positive definite matrix from its Cholesky factor.
pub fn cholesky_inverse(l: &[f64], n: usize) -> Vec<f64> {
    // Invert L, then A^{-1} = L^{-T} L^{-1}.
    let mut linv = vec![0.0; n * n];
    for i in 0..n {
        linv[i * n + i] = 1.0 / l[i * n + i];
        for j in 0..i {
            let s: f64 = (j..i).map(|k| l[i * n + k] * linv[k * n + j]).sum();
            linv[i * n + j] = -s / l[i * n + i];
        }
    }
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (i..n).map(|k| linv[k * n + i] * linv[k * n + j]).sum();
            inv[i * n + j] = s;
            inv[j * n + i] = s;
        }
    }
    inv
}

/// `log det` from a Cholesky factor.
pub fn cholesky_logdet(l: &[f64], n: usize) -> f64 {
    2.0 * (0..n).map(|i| l[i * n + i].ln()).sum::<f64>()
}

pub fn frobenius(m: &[f64]) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_simple_matrices() {
        let eye = [1.0, 0.0, 0.0, 1.0];
        assert_eq!(rank(&eye, 2, 2, 1e-12), 2);
        let r1 = [1.0, 2.0, 2.0, 4.0];
        assert_eq!(rank(&r1, 2, 2, 1e-12), 1);
        let aug = [1.0, 2.0, 1.0, 2.0, 4.0, 3.0];
        assert_eq!(rank(&aug, 2, 3, 1e-12), 2);
        assert_eq!(rank(&[0.0; 6], 2, 3, 1e-12), 0);
    }

    #[test]
    fn solve_and_cholesky() {
        let a = [4.0, 1.0, 1.0, 3.0];
        let x = solve(&a, &[1.0, 2.0], 2).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);

        let l = cholesky(&a, 2).unwrap();
        let inv = cholesky_inverse(&l, 2);
        let det = 11.0;
        assert!((inv[0] - 3.0 / det).abs() < 1e-15);
        assert!((inv[1] + 1.0 / det).abs() < 1e-15);
        assert!((cholesky_logdet(&l, 2) - det.ln()).abs() < 1e-14);

        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
        assert!(solve(&[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0], 2).is_none());
    }
}
