use serde::Serialize;

use crate::tensor::{norm, CompatDir};

/// Zero-pattern conditions on a compatible minimizer `(a, b)` of `f0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    /// `(a_i, b_i) ≠ (0, 0)` for `i = 1, 2, 3`.
    pub entries_nonzero: [bool; 3],
    /// `(a_i, a_j) ≠ (0, 0)` for `(i, j) = (1,2), (1,3), (2,3)`.
    pub a_pairs_nonzero: [bool; 3],
    /// `(b_i, b_j) ≠ (0, 0)` for the same pairs.
    pub b_pairs_nonzero: [bool; 3],
    pub passed: bool,
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Checks the zero pattern of a candidate minimizer after balancing
/// `|a| = |b|`. An entry counts as zero when it is below
/// `1e-7 · max(|a|, |b|)` in magnitude.
pub fn minimizer_structure_check(dir: &CompatDir<3>) -> StructureReport {
    let d = dir.balanced();
    let tol = 1e-7 * norm(&d.a).max(norm(&d.b));
    let nz = |v: f64| v.abs() >= tol;
    let entries_nonzero = std::array::from_fn(|i| nz(d.a[i]) || nz(d.b[i]));
    let a_pairs_nonzero = PAIRS.map(|(i, j)| nz(d.a[i]) || nz(d.a[j]));
    let b_pairs_nonzero = PAIRS.map(|(i, j)| nz(d.b[i]) || nz(d.b[j]));
    let passed = entries_nonzero
        .iter()
        .chain(&a_pairs_nonzero)
        .chain(&b_pairs_nonzero)
        .all(|&ok| ok);
    StructureReport {
        entries_nonzero,
        a_pairs_nonzero,
        b_pairs_nonzero,
        passed,
    }
}
