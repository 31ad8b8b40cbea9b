//! Built-in forms and non-quadratic test functions.

use super::{cof_translator_matrix, det2_matrix, QuadForm};
use crate::tensor::SymMat;

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &[
    "zero2",
    "zero3",
    "norm_sq2",
    "norm_sq3",
    "det2",
    "neg_det2",
    "trace_sq_minus_det2",
    "f0",
    "cof11",
    "cof22",
    "cof33",
    "neg_cof11",
    "neg_cof22",
    "neg_cof33",
];

/// The auxiliary form
/// `(ε13-ε23)² + (ε12-ε13)² + (ε12-ε23)² + ε11² + ε22² + ε33²`.
pub fn f0() -> QuadForm {
    let mut q = vec![0.0; 36];
    for i in 0..3 {
        q[i * 6 + i] = 1.0;
    }
    for i in 3..6 {
        for j in 3..6 {
            q[i * 6 + j] = if i == j { 1.0 } else { -0.5 };
        }
    }
    QuadForm::from_matrix(3, q, "f0").expect("f0 coefficients are valid")
}

/// `f0 - η|ε|²`.
pub fn f_eta(eta: f64) -> QuadForm {
    f0().add_scaled(&QuadForm::norm_sq(3), -eta)
        .expect("same dimension")
        .with_label(format!("f0 - {eta}|eps|^2"))
}

pub fn det_2d() -> QuadForm {
    QuadForm::from_matrix(2, det2_matrix(), "det2").expect("valid")
}

pub fn neg_det_2d() -> QuadForm {
    det_2d().scaled(-1.0).with_label("neg_det2")
}

/// `(tr ε)² - det ε` on `S^{2×2}`.
pub fn trace_sq_minus_det_2d() -> QuadForm {
    let q = vec![1.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.5];
    QuadForm::from_matrix(2, q, "trace_sq_minus_det2").expect("valid")
}

/// `sign · (cof ε)_ii` on `S^{3×3}`, `i` zero-based.
pub fn cof_entry(i: usize, sign: f64) -> QuadForm {
    assert!(i < 3, "cofactor index out of range");
    let mut d = [0.0; 3];
    d[i] = sign;
    let label = format!(
        "{}cof{}{}",
        if sign < 0.0 { "neg_" } else { "" },
        i + 1,
        i + 1
    );
    QuadForm::from_matrix(3, cof_translator_matrix(&SymMat::diag(d)), label).expect("valid")
}

/// Looks up a catalog form by name.
pub fn builtin(name: &str) -> Option<QuadForm> {
    let form = match name {
        "zero2" => QuadForm::zero(2).with_label(name),
        "zero3" => QuadForm::zero(3).with_label(name),
        "norm_sq2" => QuadForm::norm_sq(2).with_label(name),
        "norm_sq3" => QuadForm::norm_sq(3).with_label(name),
        "det2" => det_2d(),
        "neg_det2" => neg_det_2d(),
        "trace_sq_minus_det2" => trace_sq_minus_det_2d(),
        "f0" => f0(),
        "cof11" => cof_entry(0, 1.0),
        "cof22" => cof_entry(1, 1.0),
        "cof33" => cof_entry(2, 1.0),
        "neg_cof11" => cof_entry(0, -1.0),
        "neg_cof22" => cof_entry(1, -1.0),
        "neg_cof33" => cof_entry(2, -1.0),
        _ => return None,
    };
    Some(form)
}

/// All catalog forms, in [`BUILTIN_NAMES`] order.
pub fn all() -> Vec<QuadForm> {
    BUILTIN_NAMES
        .iter()
        .map(|n| builtin(n).expect("listed"))
        .collect()
}

/// Regularity of a test function, as declared by its constructor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    /// Polynomial, hence smooth.
    Polynomial,
    /// Continuous, with kinks on a lower-dimensional set.
    Continuous,
}

/// A non-quadratic function on `S^{d×d}`, available only as an evaluator.
#[derive(Clone, Copy)]
pub struct TestFunction<const D: usize> {
    pub label: &'static str,
    pub smoothness: Smoothness,
    eval: fn(&SymMat<D>) -> f64,
}

impl<const D: usize> TestFunction<D> {
    pub fn eval(&self, eps: &SymMat<D>) -> f64 {
        (self.eval)(eps)
    }
}

impl<const D: usize> std::fmt::Debug for TestFunction<D> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

pub fn det_3d() -> TestFunction<3> {
    TestFunction {
        label: "det3",
        smoothness: Smoothness::Polynomial,
        eval: |e| e.det(),
    }
}

pub fn neg_det_3d() -> TestFunction<3> {
    TestFunction {
        label: "neg_det3",
        smoothness: Smoothness::Polynomial,
        eval: |e| -e.det(),
    }
}

/// `det ε` on positive definite matrices, `0` elsewhere.
pub fn sverak_2d() -> TestFunction<2> {
    TestFunction {
        label: "sverak2",
        smoothness: Smoothness::Continuous,
        eval: |e| {
            if e.eigenvalues()[0] > 0.0 {
                e.det()
            } else {
                0.0
            }
        },
    }
}

fn negative_eigenvalues(e: &SymMat<3>) -> usize {
    e.eigenvalues().iter().filter(|&&v| v < 0.0).count()
}

/// `|det ε|` if `ε` has exactly `negatives` negative eigenvalues, `0`
/// elsewhere; defined for `negatives` in `{1, 2}`.
pub fn sverak_3d(negatives: usize) -> TestFunction<3> {
    match negatives {
        1 => TestFunction {
            label: "sverak3_l1",
            smoothness: Smoothness::Continuous,
            eval: |e| {
                if negative_eigenvalues(e) == 1 {
                    e.det().abs()
                } else {
                    0.0
                }
            },
        },
        2 => TestFunction {
            label: "sverak3_l2",
            smoothness: Smoothness::Continuous,
            eval: |e| {
                if negative_eigenvalues(e) == 2 {
                    e.det().abs()
                } else {
                    0.0
                }
            },
        },
        _ => panic!("sverak_3d is defined for 1 or 2 negative eigenvalues"),
    }
}
