//! Quadratic forms on symmetric matrices, stored as symmetric coefficient
//! matrices in embedded coordinates, and the antisymmetric forms
//! `q_A(F) = A:cof F^a`.

pub mod catalog;

use serde::{Deserialize, Serialize};

use crate::json;
use crate::linalg::frobenius;
use crate::tensor::{eig_sym, sym_len, Mat, SymEigen, SymMat};
use crate::{Error, Result};

/// Relative tolerance of the polarization check in [`QuadForm::from_fn`].
pub const POLARIZATION_TOL: f64 = 1e-10;
/// Relative tolerance on `λ_min(Q)` for convexity (`λ_min ≥ -tol·|Q|`).
pub const CONVEXITY_TOL: f64 = 1e-10;

/// A quadratic form `f(ε) = x(ε)ᵀ Q x(ε)` on `S^{d×d}`, `x` the embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm {
    dim: usize,
    coeffs: Vec<f64>,
    label: String,
}

/// Outcome of the convexity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convexity {
    pub convex: bool,
    pub min_eigenvalue: f64,
}

/// On-disk representation: `{dim, coeffs, label}` with `coeffs` the upper
/// triangle of `Q`, row-major, in the embedded basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormFile {
    pub dim: usize,
    pub coeffs: Vec<f64>,
    #[serde(default)]
    pub label: String,
}

fn check_dim(dim: usize) -> Result<usize> {
    match dim {
        2 | 3 => Ok(sym_len(dim)),
        _ => Err(Error::InvalidForm(format!(
            "field `dim`: must be 2 or 3, got {dim}"
        ))),
    }
}

impl QuadForm {
    /// From the full `k × k` coefficient matrix (row-major).
    pub fn from_matrix(dim: usize, coeffs: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let k = check_dim(dim)?;
        if coeffs.len() != k * k {
            return Err(Error::InvalidForm(format!(
                "field `coeffs`: expected {} entries, found {}",
                k * k,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidForm(
                "field `coeffs`: non-finite entry".into(),
            ));
        }
        let scale = frobenius(&coeffs);
        for i in 0..k {
            for j in (i + 1)..k {
                if (coeffs[i * k + j] - coeffs[j * k + i]).abs() > 1e-14 * scale {
                    return Err(Error::InvalidForm(format!(
                        "field `coeffs`: matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let mut q = coeffs;
        for i in 0..k {
            for j in (i + 1)..k {
                let m = 0.5 * (q[i * k + j] + q[j * k + i]);
                q[i * k + j] = m;
                q[j * k + i] = m;
            }
        }
        Ok(QuadForm {
            dim,
            coeffs: q,
            label: label.into(),
        })
    }

    /// From the upper triangle of `Q`, row-major (the file format).
    pub fn from_upper(dim: usize, upper: &[f64], label: impl Into<String>) -> Result<Self> {
        let k = check_dim(dim)?;
        let expected = k * (k + 1) / 2;
        if upper.len() != expected {
            return Err(Error::InvalidForm(format!(
                "field `coeffs`: expected {expected} upper-triangle entries for dim {dim}, found {}",
                upper.len()
            )));
        }
        let mut q = vec![0.0; k * k];
        let mut it = upper.iter();
        for i in 0..k {
            for j in i..k {
                let v = *it.next().unwrap();
                q[i * k + j] = v;
                q[j * k + i] = v;
            }
        }
        Self::from_matrix(dim, q, label)
    }

    /// Recovers the coefficient matrix of a function of the embedded
    /// coordinates by polarization on basis pairs, then checks that the
    /// function really is a quadratic form.
    pub fn from_fn<F>(dim: usize, f: F, label: impl Into<String>) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let k = check_dim(dim)?;
        let basis = |i: usize| {
            let mut v = vec![0.0; k];
            v[i] = 1.0;
            v
        };
        let combo = |i: usize, si: f64, j: usize, sj: f64| {
            let mut v = vec![0.0; k];
            v[i] += si;
            v[j] += sj;
            v
        };
        let mut q = vec![0.0; k * k];
        for i in 0..k {
            q[i * k + i] = f(&basis(i));
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let v = 0.5 * (f(&combo(i, 1.0, j, 1.0)) - q[i * k + i] - q[j * k + j]);
                q[i * k + j] = v;
                q[j * k + i] = v;
            }
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("QuadForm::from_fn"));
        }
        let form = QuadForm {
            dim,
            coeffs: q,
            label: label.into(),
        };

        let mut probes: Vec<(String, Vec<f64>)> = vec![("0".into(), vec![0.0; k])];
        for i in 0..k {
            probes.push((format!("-e{i}"), combo(i, -1.0, i, 0.0)));
            probes.push((format!("2e{i}"), combo(i, 2.0, i, 0.0)));
            for j in (i + 1)..k {
                probes.push((format!("e{i}-e{j}"), combo(i, 1.0, j, -1.0)));
            }
        }
        probes.push((
            "ramp".into(),
            (0..k).map(|i| (i + 1) as f64 / k as f64).collect(),
        ));
        probes.push((
            "alternating".into(),
            (0..k)
                .map(|i| if i % 2 == 0 { 0.7 } else { -1.3 })
                .collect(),
        ));

        let scale = frobenius(&form.coeffs).max(f64::MIN_POSITIVE);
        for (name, x) in &probes {
            let expected = form.eval_embedded(x);
            let got = f(x);
            let xx: f64 = x.iter().map(|v| v * v).sum();
            let mismatch = (got - expected).abs() / (scale * xx.max(1.0));
            if !(mismatch <= POLARIZATION_TOL) {
                return Err(Error::NotQuadratic {
                    probe: name.clone(),
                    mismatch,
                });
            }
        }
        Ok(form)
    }

    /// [`QuadForm::from_fn`] for a function of the symmetric matrix itself.
    pub fn from_sym_fn<const D: usize, F>(f: F, label: impl Into<String>) -> Result<Self>
    where
        F: Fn(&SymMat<D>) -> f64,
    {
        Self::from_fn(D, |x| f(&SymMat::<D>::from_embedded(x)), label)
    }

    pub fn zero(dim: usize) -> Self {
        let k = sym_len(dim);
        QuadForm {
            dim,
            coeffs: vec![0.0; k * k],
            label: "zero".into(),
        }
    }

    /// `|ε|²` (identity in embedded coordinates).
    pub fn norm_sq(dim: usize) -> Self {
        let k = sym_len(dim);
        let mut q = vec![0.0; k * k];
        for i in 0..k {
            q[i * k + i] = 1.0;
        }
        QuadForm {
            dim,
            coeffs: q,
            label: "norm_sq".into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of embedded coordinates `k`.
    pub fn len(&self) -> usize {
        sym_len(self.dim)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs[i * self.len() + j]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Upper triangle of `Q`, row-major.
    pub fn upper(&self) -> Vec<f64> {
        let k = self.len();
        (0..k)
            .flat_map(|i| (i..k).map(move |j| (i, j)))
            .map(|(i, j)| self.coeffs[i * k + j])
            .collect()
    }

    pub fn eval_embedded(&self, x: &[f64]) -> f64 {
        let k = self.len();
        debug_assert_eq!(x.len(), k);
        let mut s = 0.0;
        for i in 0..k {
            let row = &self.coeffs[i * k..(i + 1) * k];
            s += x[i] * row.iter().zip(x).map(|(q, v)| q * v).sum::<f64>();
        }
        s
    }

    /// Evaluates the form at a symmetric matrix. Panics if `D != dim()`.
    pub fn eval<const D: usize>(&self, eps: &SymMat<D>) -> f64 {
        assert_eq!(D, self.dim, "form dimension mismatch");
        let mut x = [0.0; 6];
        eps.embed_into(&mut x);
        self.eval_embedded(&x[..self.len()])
    }

    /// Symmetric bilinear form `B(x, y)` with `B(x, x) = f(x)`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let k = self.len();
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                s += x[i] * self.coeffs[i * k + j] * y[j];
            }
        }
        s
    }

    pub fn scaled(&self, c: f64) -> Self {
        QuadForm {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|q| q * c).collect(),
            label: self.label.clone(),
        }
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, other: &QuadForm, c: f64) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(QuadForm {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + c * b)
                .collect(),
            label: self.label.clone(),
        })
    }

    /// Frobenius norm of the coefficient matrix.
    pub fn norm(&self) -> f64 {
        frobenius(&self.coeffs)
    }

    pub fn eigen(&self) -> SymEigen {
        eig_sym(self.len(), &self.coeffs).expect("coefficients are finite by construction")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().values[0]
    }

    /// A quadratic form is convex iff it is nonnegative iff `Q ⪰ 0`.
    pub fn is_convex(&self) -> Convexity {
        let min_eigenvalue = self.min_eigenvalue();
        Convexity {
            convex: min_eigenvalue >= -CONVEXITY_TOL * self.norm(),
            min_eigenvalue,
        }
    }

    pub fn to_file(&self) -> FormFile {
        FormFile {
            dim: self.dim,
            coeffs: self.upper(),
            label: self.label.clone(),
        }
    }

    pub fn from_file(file: &FormFile) -> Result<Self> {
        Self::from_upper(file.dim, &file.coeffs, file.label.clone())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parse = || -> std::result::Result<FormFile, String> {
            let obj = json::object(text, &["dim", "coeffs", "label"], "form")?;
            Ok(FormFile {
                dim: json::required(&obj, "dim")?,
                coeffs: json::required(&obj, "coeffs")?,
                label: json::field(&obj, "label")?.unwrap_or_default(),
            })
        };
        Self::from_file(&parse().map_err(Error::InvalidForm)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("form serializes")
    }
}

/// Coefficient matrix (k × k, row-major) of the quadratic form `ε ↦ A:cof ε`
/// on `S^{3×3}`, for symmetric `A`.
pub fn cof_translator_matrix(a: &SymMat<3>) -> Vec<f64> {
    let r = 1.0 / (2.0 * std::f64::consts::SQRT_2);
    let mut q = vec![0.0; 36];
    // Adds `coef · x_i x_j` to the form.
    let mut add = |i: usize, j: usize, coef: f64| {
        if i == j {
            q[i * 6 + i] += coef;
        } else {
            q[i * 6 + j] += 0.5 * coef;
            q[j * 6 + i] += 0.5 * coef;
        }
    };
    let (a11, a22, a33) = (a.get(0, 0), a.get(1, 1), a.get(2, 2));
    let (a12, a13, a23) = (a.get(0, 1), a.get(0, 2), a.get(1, 2));
    // Embedded x = (ε11, ε22, ε33, √2ε12, √2ε13, √2ε23).
    // (cof ε)_11 = ε22ε33 - ε23²
    add(1, 2, a11);
    add(5, 5, -0.5 * a11);
    // (cof ε)_22 = ε11ε33 - ε13²
    add(0, 2, a22);
    add(4, 4, -0.5 * a22);
    // (cof ε)_33 = ε11ε22 - ε12²
    add(0, 1, a33);
    add(3, 3, -0.5 * a33);
    // (cof ε)_12 = ε13ε23 - ε12ε33, counted twice in A:cof ε
    add(4, 5, a12);
    add(3, 2, -4.0 * r * a12);
    // (cof ε)_13 = ε12ε23 - ε22ε13
    add(3, 5, a13);
    add(1, 4, -4.0 * r * a13);
    // (cof ε)_23 = ε12ε13 - ε11ε23
    add(3, 4, a23);
    add(0, 5, -4.0 * r * a23);
    q
}

/// Coefficient matrix (3 × 3) of `ε ↦ det ε` on `S^{2×2}`.
pub fn det2_matrix() -> Vec<f64> {
    // det ε = x1 x2 - x3²/2 with x = (ε11, ε22, √2ε12).
    vec![0.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, -0.5]
}

/// `q_A(F) = A:cof F^a`, a quadratic form on all of `R^{3×3}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntiQuadForm {
    pub a: SymMat<3>,
}

impl AntiQuadForm {
    pub fn new(a: SymMat<3>) -> Self {
        AntiQuadForm { a }
    }

    pub fn eval(&self, f: &Mat<3>) -> f64 {
        qa_eval(&self.a, f)
    }

    pub fn is_convex(&self) -> bool {
        qa_is_convex(&self.a)
    }
}

/// `A:cof F^a`, equal to `A x · x` for the axial vector `x` of `F^a`.
pub fn qa_eval(a: &SymMat<3>, f: &Mat<3>) -> f64 {
    let (_, anti) = f.sym_split();
    a.to_mat().frob_dot(&anti.cof())
}

/// `q_A` is convex iff `A` is positive semi-definite.
pub fn qa_is_convex(a: &SymMat<3>) -> bool {
    let lmin = a.eigenvalues()[0];
    lmin >= -CONVEXITY_TOL * a.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn norm_sq_is_identity() {
        let f = QuadForm::from_sym_fn::<3, _>(|e| e.frob_dot(e), "n").unwrap();
        for (a, b) in f.coeffs().iter().zip(QuadForm::norm_sq(3).coeffs()) {
            assert!((a - b).abs() < 1e-15);
        }
        let c = f.is_convex();
        assert!(c.convex);
        assert!((c.min_eigenvalue - 1.0).abs() < 1e-14);
    }

    #[test]
    fn det_2d_form() {
        let f = QuadForm::from_sym_fn::<2, _>(|e| e.det(), "det").unwrap();
        for (a, b) in f.coeffs().iter().zip(det2_matrix()) {
            assert!((a - b).abs() < 1e-15);
        }
        let e12 = SymMat::<2>::odot(&[1.0, 0.0], &[0.0, 1.0]);
        assert!((f.eval(&e12) + 0.25).abs() < 1e-15);
        assert!(!f.is_convex().convex);
    }

    #[test]
    fn trace_sq_minus_det_is_convex() {
        let f = QuadForm::from_sym_fn::<2, _>(|e| e.trace().powi(2) - e.det(), "g").unwrap();
        let h = QuadForm::from_sym_fn::<2, _>(|e| e.frob_dot(e) + e.det(), "h").unwrap();
        for (a, b) in f.coeffs().iter().zip(h.coeffs()) {
            assert!((a - b).abs() < 1e-15);
        }
        let c = f.is_convex();
        assert!(c.convex);
        // Oracle: Q = [[1, ½, 0], [½, 1, 0], [0, 0, ½]] has spectrum {½, ½, 3/2}.
        assert!((c.min_eigenvalue - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_quadratic() {
        let err = QuadForm::from_sym_fn::<3, _>(|e| e.det(), "det3").unwrap_err();
        assert!(matches!(err, Error::NotQuadratic { .. }));
        let err = QuadForm::from_fn(2, |x| x[0] * x[0] + 1.0, "affine").unwrap_err();
        assert!(matches!(err, Error::NotQuadratic { .. }));
        let err = QuadForm::from_fn(2, |x| x[0].abs(), "abs").unwrap_err();
        assert!(matches!(err, Error::NotQuadratic { .. }));
    }

    #[test]
    fn file_round_trip_and_validation() {
        let f = catalog::f0();
        let g = QuadForm::from_json(&f.to_json()).unwrap();
        assert_eq!(f, g);

        let err = QuadForm::from_json(r#"{"dim": 4, "coeffs": []}"#).unwrap_err();
        assert!(err.to_string().contains("`dim`"));
        let err = QuadForm::from_json(r#"{"dim": 2, "coeffs": [1, 2]}"#).unwrap_err();
        assert!(err.to_string().contains("`coeffs`"));
        let err = QuadForm::from_json(r#"{"dim": 2}"#).unwrap_err();
        assert!(err.to_string().contains("`coeffs`"));
        let err = QuadForm::from_json(r#"{"dim": "two", "coeffs": []}"#).unwrap_err();
        assert!(err.to_string().contains("`dim`"));
        let err = QuadForm::from_json(r#"{"dim": 2, "coeffs": [], "extra": 1}"#).unwrap_err();
        assert!(err.to_string().contains("`extra`"));
    }

    #[test]
    fn cof_translator_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = SymMat::<3>::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let q = cof_translator_matrix(&a);
            let form = QuadForm::from_matrix(3, q, "C(A)").unwrap();
            let eps = SymMat::<3>::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let direct = a.frob_dot(&eps.cof());
            assert!((form.eval(&eps) - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn qa_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = Mat(std::array::from_fn(|_| {
            std::array::from_fn(|_| rng.gen_range(-1.0..1.0))
        }));
        let x = f.axial();
        let eye = SymMat::<3>::identity();
        assert!((qa_eval(&eye, &f) - x.iter().map(|v| v * v).sum::<f64>()).abs() < 1e-14);

        let a = SymMat::diag([1.0, 1.0, -1.0]);
        let fa = Mat::from_axial(&[0.0, 0.0, 1.0]);
        assert_eq!(qa_eval(&a, &fa), -1.0);
        assert!(!qa_is_convex(&a));
        assert!(qa_is_convex(&eye));
        assert!(AntiQuadForm::new(eye).is_convex());
    }
}
