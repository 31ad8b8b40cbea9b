//! Dense 2×2 / 3×3 matrices, symmetric matrices in orthonormal embedded
//! coordinates, minors and cofactors.
//!
//! Symmetric matrices are embedded into `R^k`, `k = d(d+1)/2`, with the fixed
//! coordinate order `(11, 22, 12)` for `d = 2` and `(11, 22, 33, 12, 13, 23)`
//! for `d = 3`. Off-diagonal coordinates carry a factor `√2`, so the Euclidean
//! inner product of embeddings equals the Frobenius product `A:B`.

mod eigen;

use std::ops::{Add, Mul, Neg, Sub};

pub use eigen::{eig_sym, min_eigenvalue, SymEigen};

pub(crate) const SQRT2: f64 = std::f64::consts::SQRT_2;

/// A vector in `R^d`.
pub type Vector<const D: usize> = [f64; D];

pub fn dot<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm<const D: usize>(a: &Vector<D>) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale<const D: usize>(a: &Vector<D>, s: f64) -> Vector<D> {
    a.map(|x| x * s)
}

pub fn cross(a: &Vector<3>, b: &Vector<3>) -> Vector<3> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `a ⊗ b`, i.e. `(a ⊗ b)_ij = a_i b_j`.
pub fn outer<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> Mat<D> {
    let mut m = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            m[i][j] = a[i] * b[j];
        }
    }
    Mat(m)
}

/// Dimension of the space of symmetric `d × d` matrices.
pub const fn sym_len(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Matrix index pairs in embedding order.
pub fn embedding_pairs(d: usize) -> &'static [(usize, usize)] {
    match d {
        2 => &[(0, 0), (1, 1), (0, 1)],
        3 => &[(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)],
        _ => panic!("only d = 2 and d = 3 are supported, got {d}"),
    }
}

/// A general real `d × d` matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat<const D: usize>(pub [[f64; D]; D]);

impl<const D: usize> Mat<D> {
    pub fn zeros() -> Self {
        Mat([[0.0; D]; D])
    }

    pub fn identity() -> Self {
        let mut m = [[0.0; D]; D];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Mat(m)
    }

    pub fn transpose(&self) -> Self {
        let mut m = [[0.0; D]; D];
        for i in 0..D {
            for j in 0..D {
                m[i][j] = self.0[j][i];
            }
        }
        Mat(m)
    }

    /// Frobenius product `A:B`.
    pub fn frob_dot(&self, other: &Self) -> f64 {
        let mut s = 0.0;
        for i in 0..D {
            for j in 0..D {
                s += self.0[i][j] * other.0[i][j];
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.frob_dot(self).sqrt()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut m = [[0.0; D]; D];
        for i in 0..D {
            for j in 0..D {
                m[i][j] = (0..D).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Mat(m)
    }

    pub fn trace(&self) -> f64 {
        (0..D).map(|i| self.0[i][i]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// Splits `F = F^s + F^a` into its symmetric and antisymmetric parts.
    pub fn sym_split(&self) -> (SymMat<D>, Mat<D>) {
        let mut anti = [[0.0; D]; D];
        for i in 0..D {
            for j in 0..D {
                anti[i][j] = 0.5 * (self.0[i][j] - self.0[j][i]);
            }
        }
        (SymMat::symmetrize(self), Mat(anti))
    }
}

impl Mat<2> {
    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Matrix of signed minors, `(cof F)_ij = (-1)^{i+j} M_ij(F)`.
    pub fn cof(&self) -> Self {
        let m = &self.0;
        Mat([[m[1][1], -m[1][0]], [-m[0][1], m[0][0]]])
    }
}

impl Mat<3> {
    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Matrix of signed 2×2 minors, `(cof F)_ij = (-1)^{i+j} M_ij(F)`.
    pub fn cof(&self) -> Self {
        let m = &self.0;
        let mut c = [[0.0; 3]; 3];
        for (i, row) in c.iter_mut().enumerate() {
            let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
            for (j, entry) in row.iter_mut().enumerate() {
                let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                // Cyclic index choice absorbs the (-1)^{i+j} sign.
                *entry = m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1];
            }
        }
        Mat(c)
    }

    /// Axial vector `x` of the antisymmetric part, in the convention
    /// `F^a = [[0, x3, -x2], [-x3, 0, x1], [x2, -x1, 0]]`.
    pub fn axial(&self) -> Vector<3> {
        let (_, a) = self.sym_split();
        [a.0[1][2], a.0[2][0], a.0[0][1]]
    }

    /// Antisymmetric matrix with axial vector `x` (inverse of [`Mat::axial`]).
    pub fn from_axial(x: &Vector<3>) -> Self {
        Mat([[0.0, x[2], -x[1]], [-x[2], 0.0, x[0]], [x[1], -x[0], 0.0]])
    }
}

impl<const D: usize> Add for Mat<D> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..D {
            for j in 0..D {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl<const D: usize> Sub for Mat<D> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<const D: usize> Neg for Mat<D> {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<const D: usize> Mul<f64> for Mat<D> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Mat(self.0.map(|row| row.map(|x| x * s)))
    }
}

/// A symmetric `d × d` matrix (a strain).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat<const D: usize> {
    m: [[f64; D]; D],
}

impl<const D: usize> SymMat<D> {
    /// Number of embedded coordinates.
    pub const LEN: usize = sym_len(D);

    pub fn zeros() -> Self {
        SymMat { m: [[0.0; D]; D] }
    }

    pub fn identity() -> Self {
        SymMat {
            m: Mat::<D>::identity().0,
        }
    }

    /// Symmetric part `½(F + Fᵀ)`; exact for symmetric input.
    pub fn symmetrize(f: &Mat<D>) -> Self {
        let mut m = [[0.0; D]; D];
        for i in 0..D {
            for j in 0..D {
                m[i][j] = if i == j {
                    f.0[i][i]
                } else {
                    0.5 * (f.0[i][j] + f.0[j][i])
                };
            }
        }
        SymMat { m }
    }

    /// Builds a symmetric matrix from its upper triangle, `entry(i, j)` with `i <= j`.
    pub fn from_fn(mut entry: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = [[0.0; D]; D];
        for i in 0..D {
            for j in i..D {
                let v = entry(i, j);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        SymMat { m }
    }

    pub fn diag(d: [f64; D]) -> Self {
        Self::from_fn(|i, j| if i == j { d[i] } else { 0.0 })
    }

    /// Inverse of [`SymMat::embed`]. Panics if `x.len() != LEN`.
    pub fn from_embedded(x: &[f64]) -> Self {
        assert_eq!(x.len(), Self::LEN, "embedded length mismatch");
        let mut m = [[0.0; D]; D];
        for (k, &(i, j)) in embedding_pairs(D).iter().enumerate() {
            if i == j {
                m[i][i] = x[k];
            } else {
                m[i][j] = x[k] / SQRT2;
                m[j][i] = m[i][j];
            }
        }
        SymMat { m }
    }

    /// Writes the embedded coordinates into `out[..LEN]`.
    pub fn embed_into(&self, out: &mut [f64]) {
        for (k, &(i, j)) in embedding_pairs(D).iter().enumerate() {
            out[k] = if i == j {
                self.m[i][i]
            } else {
                SQRT2 * self.m[i][j]
            };
        }
    }

    pub fn embed(&self) -> Vec<f64> {
        let mut out = vec![0.0; Self::LEN];
        self.embed_into(&mut out);
        out
    }

    /// Symmetrized tensor product `a⊙b = ½(a⊗b + b⊗a)`.
    pub fn odot(a: &Vector<D>, b: &Vector<D>) -> Self {
        Self::from_fn(|i, j| 0.5 * (a[i] * b[j] + a[j] * b[i]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn as_array(&self) -> &[[f64; D]; D] {
        &self.m
    }

    pub fn to_mat(&self) -> Mat<D> {
        Mat(self.m)
    }

    pub fn frob_dot(&self, other: &Self) -> f64 {
        self.to_mat().frob_dot(&other.to_mat())
    }

    pub fn norm(&self) -> f64 {
        self.frob_dot(self).sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..D).map(|i| self.m[i][i]).sum()
    }

    pub fn apply(&self, v: &Vector<D>) -> Vector<D> {
        let mut out = [0.0; D];
        for i in 0..D {
            out[i] = dot(&self.m[i], v);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|x| x.is_finite())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut data = Vec::with_capacity(D * D);
        for row in &self.m {
            data.extend_from_slice(row);
        }
        eig_sym(D, &data)
            .map(|e| e.values)
            .unwrap_or_else(|_| vec![f64::NAN; D])
    }
}

impl SymMat<2> {
    pub fn det(&self) -> f64 {
        self.to_mat().det()
    }

    pub fn cof(&self) -> Self {
        SymMat {
            m: self.to_mat().cof().0,
        }
    }
}

impl SymMat<3> {
    pub fn det(&self) -> f64 {
        self.to_mat().det()
    }

    /// Cofactor matrix; symmetric for symmetric input.
    pub fn cof(&self) -> Self {
        SymMat {
            m: self.to_mat().cof().0,
        }
    }

    /// `((cof ε)_11, (cof ε)_22, (cof ε)_33)`.
    pub fn cof_diag(&self) -> Vector<3> {
        let c = self.cof();
        [c.m[0][0], c.m[1][1], c.m[2][2]]
    }

    /// `((cof ε)_12, (cof ε)_13, (cof ε)_23)`.
    pub fn cof_off(&self) -> Vector<3> {
        let c = self.cof();
        [c.m[0][1], c.m[0][2], c.m[1][2]]
    }
}

impl<const D: usize> Add for SymMat<D> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        SymMat {
            m: (self.to_mat() + rhs.to_mat()).0,
        }
    }
}

impl<const D: usize> Sub for SymMat<D> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        SymMat {
            m: (self.to_mat() - rhs.to_mat()).0,
        }
    }
}

impl<const D: usize> Neg for SymMat<D> {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<const D: usize> Mul<f64> for SymMat<D> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        SymMat {
            m: (self.to_mat() * s).0,
        }
    }
}

/// A compatible direction: the pair `(a, b)` generating `a⊙b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatDir<const D: usize> {
    pub a: Vector<D>,
    pub b: Vector<D>,
}

impl<const D: usize> CompatDir<D> {
    pub fn new(a: Vector<D>, b: Vector<D>) -> Self {
        CompatDir { a, b }
    }

    pub fn odot(&self) -> SymMat<D> {
        SymMat::odot(&self.a, &self.b)
    }

    /// Rescales `a` and `b` by the same factor so that `|a⊙b| = 1`.
    /// Returns `None` when `a⊙b` vanishes.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.odot().norm();
        if !(n > 0.0) || !n.is_finite() {
            return None;
        }
        let s = 1.0 / n.sqrt();
        Some(CompatDir {
            a: scale(&self.a, s),
            b: scale(&self.b, s),
        })
    }

    /// Rescales `(a, b) -> (t a, b / t)` so that `|a| = |b|`; `a⊙b` is unchanged.
    pub fn balanced(&self) -> Self {
        let (na, nb) = (norm(&self.a), norm(&self.b));
        if na == 0.0 || nb == 0.0 {
            return *self;
        }
        let t = (nb / na).sqrt();
        CompatDir {
            a: scale(&self.a, t),
            b: scale(&self.b, 1.0 / t),
        }
    }
}

impl CompatDir<3> {
    pub fn cross(&self) -> Vector<3> {
        cross(&self.a, &self.b)
    }
}

/// `(det F, det F^s, det F^a)` for a 2×2 matrix.
pub fn det_split_2d(f: &Mat<2>) -> (f64, f64, f64) {
    let (s, a) = f.sym_split();
    (f.det(), s.det(), a.det())
}

/// `(cof F^s, (cof F)^s, cof F^a)` for a 3×3 matrix.
pub fn cof_split_3d(f: &Mat<3>) -> (SymMat<3>, SymMat<3>, SymMat<3>) {
    let (s, a) = f.sym_split();
    (
        s.cof(),
        SymMat::symmetrize(&f.cof()),
        SymMat::symmetrize(&a.cof()),
    )
}
