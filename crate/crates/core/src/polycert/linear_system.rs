use serde::Serialize;

use crate::linalg::{frobenius, rank};
use crate::tensor::{eig_sym, CompatDir, Vector};
use crate::{Error, Result};

/// Relative pivot threshold of the rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// The 6×6 system `L x = c` in the unknowns
/// `x = (A11, A22, A33, A12, A13, A23)` whose solvability decides whether a
/// translator `A` can keep `f0 - η|ε|²` nonnegative to first order around
/// the compatible minimizer `a⊙b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearSystem {
    pub l: [[f64; 6]; 6],
    pub c: [f64; 6],
}

/// Outcome of the rank test on `L x = c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearSystemReport {
    pub system: LinearSystem,
    pub rank_l: usize,
    pub rank_aug: usize,
    pub inconsistent: bool,
    /// Minimum-norm least-squares solution.
    pub lstsq: [f64; 6],
    /// `|L lstsq - c|`.
    pub residual: f64,
}

fn check_unit(dir: &CompatDir<3>) -> Result<()> {
    let n = dir.odot().norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "linear system needs |a⊙b| = 1, got {n:.12}"
        )));
    }
    Ok(())
}

/// Assembles `L` and `c` row by row in the fixed equation order.
pub fn build_linear_system(a: &Vector<3>, b: &Vector<3>, eta: f64) -> Result<LinearSystem> {
    check_unit(&CompatDir::new(*a, *b))?;
    let [a1, a2, a3] = *a;
    let [b1, b2, b3] = *b;
    let s12 = a1 * b2 + a2 * b1;
    let s13 = a1 * b3 + a3 * b1;
    let s23 = a2 * b3 + a3 * b2;
    let (p11, p22, p33) = (a1 * b1, a2 * b2, a3 * b3);
    let w = 2.0 * (1.0 - eta);
    let l = [
        [0.0, p33, p22, 0.0, 0.0, -s23],
        [p33, 0.0, p11, 0.0, -s13, 0.0],
        [p22, p11, 0.0, -s12, 0.0, 0.0],
        [0.0, 0.0, -s12, -2.0 * p33, s23, s13],
        [0.0, -s13, 0.0, s23, -2.0 * p22, s12],
        [-s23, 0.0, 0.0, s13, s12, -2.0 * p11],
    ];
    let c = [
        -w * p11,
        -w * p22,
        -w * p33,
        s13 + s23 - w * s12,
        s12 + s23 - w * s13,
        s12 + s13 - w * s23,
    ];
    Ok(LinearSystem { l, c })
}

fn lstsq(l: &[[f64; 6]; 6], c: &[f64; 6], cutoff: f64) -> [f64; 6] {
    // Pseudo-inverse through the eigen-decomposition of LᵀL.
    let mut ltl = vec![0.0; 36];
    let mut ltc = [0.0; 6];
    for i in 0..6 {
        for j in 0..6 {
            ltl[i * 6 + j] = (0..6).map(|k| l[k][i] * l[k][j]).sum();
        }
        ltc[i] = (0..6).map(|k| l[k][i] * c[k]).sum();
    }
    let eig = eig_sym(6, &ltl).expect("finite system");
    let mut x = [0.0; 6];
    for (val, vec) in eig.values.iter().zip(&eig.vectors) {
        if *val <= cutoff * cutoff {
            continue;
        }
        let coef: f64 = vec.iter().zip(&ltc).map(|(v, t)| v * t).sum::<f64>() / val;
        for i in 0..6 {
            x[i] += coef * vec[i];
        }
    }
    x
}

/// Rank test: the system is inconsistent iff `rank [L|c] > rank L`, with
/// pivots below `1e-10` times the Frobenius norm of the respective matrix
/// treated as zero.
pub fn linear_system_refutation(dir: &CompatDir<3>, eta: f64) -> Result<LinearSystemReport> {
    check_unit(dir)?;
    let system = build_linear_system(&dir.a, &dir.b, eta)?;
    let flat_l: Vec<f64> = system.l.iter().flatten().copied().collect();
    let mut flat_aug = Vec::with_capacity(42);
    for (row, ci) in system.l.iter().zip(&system.c) {
        flat_aug.extend_from_slice(row);
        flat_aug.push(*ci);
    }
    let tol_l = RANK_TOL * frobenius(&flat_l);
    let tol_aug = RANK_TOL * frobenius(&flat_aug);
    let rank_l = rank(&flat_l, 6, 6, tol_l);
    let rank_aug = rank(&flat_aug, 6, 7, tol_aug);
    let x = lstsq(&system.l, &system.c, tol_l);
    let residual = (0..6)
        .map(|i| {
            let lx: f64 = (0..6).map(|j| system.l[i][j] * x[j]).sum();
            (lx - system.c[i]).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    Ok(LinearSystemReport {
        system,
        rank_l,
        rank_aug,
        inconsistent: rank_aug > rank_l,
        lstsq: x,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::norm;

    fn unit_dir(a: [f64; 3], b: [f64; 3]) -> CompatDir<3> {
        CompatDir::new(a, b).normalized().unwrap()
    }

    #[test]
    fn displayed_entries() {
        let s = 1.0 / 3f64.sqrt();
        let (a, b) = ([s; 3], [s; 3]);
        let eta = 0.19;
        let sys = build_linear_system(&a, &b, eta).unwrap();
        assert_eq!(
            sys.l[0],
            [
                0.0,
                a[2] * b[2],
                a[1] * b[1],
                0.0,
                0.0,
                -a[1] * b[2] - a[2] * b[1]
            ]
        );
        assert_eq!(sys.c[0], -2.0 * (1.0 - eta) * a[0] * b[0]);
    }

    #[test]
    fn rows_match_perturbation_equations() {
        // Row i of L x - c is a multiple of the corresponding first-order
        // coefficient written in terms of ε = a⊙b: once for the diagonal
        // perturbations, twice for the off-diagonal ones.
        let d = unit_dir([0.3, -1.1, 0.7], [1.2, 0.4, -0.5]);
        let eta = 0.2;
        let e = d.odot();
        let g = |i: usize, j: usize| e.get(i, j);
        let x = [0.4, -0.3, 1.1, 0.25, -0.6, 0.8];
        let (a11, a22, a33, a12, a13, a23) = (x[0], x[1], x[2], x[3], x[4], x[5]);
        let w = 2.0 * (1.0 - eta);
        let expected = [
            g(2, 2) * a22 + g(1, 1) * a33 - 2.0 * g(1, 2) * a23 + w * g(0, 0),
            g(2, 2) * a11 + g(0, 0) * a33 - 2.0 * g(0, 2) * a13 + w * g(1, 1),
            g(1, 1) * a11 + g(0, 0) * a22 - 2.0 * g(0, 1) * a12 + w * g(2, 2),
            -g(0, 1) * a33 - g(2, 2) * a12 + g(1, 2) * a13 + g(0, 2) * a23
                - (g(0, 2) + g(1, 2) - w * g(0, 1)),
            -g(0, 2) * a22 + g(1, 2) * a12 - g(1, 1) * a13 + g(0, 1) * a23
                - (g(0, 1) + g(1, 2) - w * g(0, 2)),
            -g(1, 2) * a11 + g(0, 2) * a12 + g(0, 1) * a13
                - g(0, 0) * a23
                - (g(0, 1) + g(0, 2) - w * g(1, 2)),
        ];
        let sys = build_linear_system(&d.a, &d.b, eta).unwrap();
        let factor = [1.0, 1.0, 1.0, 2.0, 2.0, 2.0];
        for i in 0..6 {
            let lx: f64 = (0..6).map(|j| sys.l[i][j] * x[j]).sum();
            assert!(
                (lx - sys.c[i] - factor[i] * expected[i]).abs() < 1e-12,
                "row {i}"
            );
        }
    }

    #[test]
    fn generic_directions_are_inconsistent() {
        // Rank-one direction with nonzero entries.
        let r = linear_system_refutation(&unit_dir([1.0; 3], [1.0; 3]), 0.19).unwrap();
        assert_eq!((r.rank_l, r.rank_aug), (3, 4));
        assert!(r.inconsistent);
        let r =
            linear_system_refutation(&unit_dir([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]), 0.19).unwrap();
        assert!(r.inconsistent);
        assert!(r.residual > 1e-3);
        // Rank-two direction with a3 (a2 b1 - a1 b2) b3 ≠ 0.
        let r =
            linear_system_refutation(&unit_dir([1.0, 2.0, 3.0], [3.0, -1.0, 2.0]), 0.19).unwrap();
        assert_eq!((r.rank_l, r.rank_aug), (4, 5));
        assert!(r.inconsistent);
    }

    #[test]
    fn requires_unit_direction() {
        let d = CompatDir::new([1.0, 0.0, 0.0], [0.0, 2.0, 0.0]);
        assert!(norm(&d.a) > 0.0);
        assert!(linear_system_refutation(&d, 0.1).is_err());
        assert!(build_linear_system(&d.a, &d.b, 0.1).is_err());
    }
}
