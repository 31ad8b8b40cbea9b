use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_TOL: f64 = 1e-14;

/// Eigen-decomposition of a small symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// `vectors[i]` is the unit eigenvector for `values[i]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi eigen-decomposition of the symmetric `n × n` matrix stored
/// row-major in `data`. Only the upper triangle is read.
///
/// Sweeps stop once the off-diagonal Frobenius mass drops below
/// `1e-14 · |S|`, or after 100 sweeps.
pub fn eig_sym(n: usize, data: &[f64]) -> Result<SymEigen> {
    if data.len() != n * n {
        return Err(Error::InvalidArgument(format!(
            "eig_sym: expected {} entries, got {}",
            n * n,
            data.len()
        )));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("eig_sym"));
    }

    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            a[i * n + j] = data[i * n + j];
            a[j * n + i] = data[i * n + j];
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = OFF_TOL * total;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- Jᵀ A J with J the (p, q) rotation.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k * n + i]).collect())
        .collect();
    Ok(SymEigen { values, vectors })
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(n: usize, data: &[f64]) -> Result<f64> {
    Ok(eig_sym(n, data)?.values[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_and_rank_one() {
        let e = eig_sym(3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);

        let e = eig_sym(3, &[1.0; 9]).unwrap();
        assert!(e.values[0].abs() < 1e-14);
        assert!(e.values[1].abs() < 1e-14);
        assert!((e.values[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let e = eig_sym(2, &[0.0; 4]).unwrap();
        assert_eq!(e.values, vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            eig_sym(2, &[1.0, f64::NAN, 0.0, 1.0]),
            Err(Error::NonFinite("eig_sym"))
        );
    }

    #[test]
    fn random_6x6_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = 6;
            let mut s = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let x: f64 = rng.gen_range(-1.0..1.0);
                    s[i * n + j] = x;
                    s[j * n + i] = x;
                }
            }
            let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
            let e = eig_sym(n, &s).unwrap();
            // Q Λ Qᵀ reconstruction oracle.
            for i in 0..n {
                for j in 0..n {
                    let r: f64 = (0..n)
                        .map(|k| e.values[k] * e.vectors[k][i] * e.vectors[k][j])
                        .sum();
                    assert!((r - s[i * n + j]).abs() < 1e-12 * norm);
                }
            }
            for k in 0..n {
                for l in 0..n {
                    let d: f64 = (0..n).map(|i| e.vectors[k][i] * e.vectors[l][i]).sum();
                    let expect = if k == l { 1.0 } else { 0.0 };
                    assert!((d - expect).abs() < 1e-10);
                }
                // |S v - λ v|
                let res: f64 = (0..n)
                    .map(|i| {
                        let sv: f64 = (0..n).map(|j| s[i * n + j] * e.vectors[k][j]).sum();
                        (sv - e.values[k] * e.vectors[k][i]).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt();
                assert!(res <= 1e-10 * norm);
            }
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
