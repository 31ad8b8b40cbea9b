//! Lower bounds on symmetric quasiconvex envelopes of 2d energies by
//! translation: `-α det` is symmetric quasiconvex for every `α ≥ 0`, so
//! `(f + α det)^c - α det` stays below the envelope.
//!
//! Strains are gridded in the embedded coordinates `(ε11, ε22, √2 ε12)`.

mod envelope;
mod wells;

use rayon::prelude::*;

use crate::tensor::SymMat;
use crate::{Error, Result};

pub use envelope::{convex_envelope, legendre_1d, Axis, EnvelopeOptions, GridFn};
pub use wells::{two_well, two_well_axes, Wells};

pub const DEFAULT_ALPHAS: [f64; 6] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];

/// Pointwise data of the translation bound on a 3-axis strain grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationBound {
    pub axes: [Axis; 3],
    /// Sorted translator weights actually used; always contains 0.
    pub alphas: Vec<f64>,
    pub f: Vec<f64>,
    /// Convex envelope of `f` (the `α = 0` bound).
    pub envelope: Vec<f64>,
    pub bound: Vec<f64>,
    /// Smallest `α` attaining the bound at each node.
    pub best_alpha: Vec<f64>,
}

impl TranslationBound {
    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        let [a, b, c] = self.axes;
        let k = idx % c.len;
        let j = (idx / c.len) % b.len;
        let i = idx / (c.len * b.len);
        [a.node(i), b.node(j), c.node(k)]
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.axes[1].len + j) * self.axes[2].len + k
    }

    /// `max |f|`, at least 1.
    pub fn scale(&self) -> f64 {
        self.f.iter().fold(1.0, |m, v| m.max(v.abs()))
    }
}

fn normalize_alphas(alphas: &[f64]) -> Result<Vec<f64>> {
    if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "alphas must be finite and nonnegative, got {a}"
        )));
    }
    let mut out = alphas.to_vec();
    out.push(0.0);
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

fn det_embedded(x: &[f64]) -> f64 {
    x[0] * x[1] - 0.5 * x[2] * x[2]
}

/// Evaluates `f` on the grid, convexifies `f + α det` for each `α` and keeps
/// the pointwise best `(f + α det)^c - α det`.
pub fn translation_bound_2d<F>(
    f: F,
    axes: [Axis; 3],
    alphas: &[f64],
    opts: &EnvelopeOptions,
) -> Result<TranslationBound>
where
    F: Fn(&SymMat<2>) -> f64,
{
    let alphas = normalize_alphas(alphas)?;
    let grid = GridFn::sample(axes.to_vec(), |p| f(&SymMat::from_embedded(p)))?;
    let det = GridFn::sample(axes.to_vec(), det_embedded)?.into_values();

    let bounds: Vec<Vec<f64>> = alphas
        .par_iter()
        .map(|&alpha| {
            let shifted: Vec<f64> = grid
                .values()
                .iter()
                .zip(&det)
                .map(|(v, d)| v + alpha * d)
                .collect();
            let g = GridFn::new(axes.to_vec(), shifted)?;
            let env = convex_envelope(&g, opts)?;
            Ok(env
                .values()
                .iter()
                .zip(&det)
                .map(|(e, d)| e - alpha * d)
                .collect())
        })
        .collect::<Result<_>>()?;

    let envelope = bounds[0].clone();
    let mut bound = bounds[0].clone();
    let mut best_alpha = vec![0.0; bound.len()];
    for (alpha, b) in alphas.iter().zip(&bounds).skip(1) {
        for ((best, ba), v) in bound.iter_mut().zip(best_alpha.iter_mut()).zip(b) {
            if *v > *best {
                *best = *v;
                *ba = *alpha;
            }
        }
    }
    Ok(TranslationBound {
        axes,
        alphas,
        f: grid.into_values(),
        envelope,
        bound,
        best_alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_axes() -> [Axis; 3] {
        [Axis::new(-1.0, 1.0, 9).unwrap(); 3]
    }

    #[test]
    fn alphas_always_include_zero() {
        assert_eq!(
            normalize_alphas(&[1.0, 0.5, 1.0]).unwrap(),
            vec![0.0, 0.5, 1.0]
        );
        assert!(normalize_alphas(&[-1.0]).is_err());
        assert!(normalize_alphas(&[f64::NAN]).is_err());
    }

    #[test]
    fn det_embedding() {
        let e = SymMat::<2>::from_fn(|i, j| [[1.5, -0.4], [-0.4, 2.0]][i][j]);
        assert!((det_embedded(&e.embed()) - e.det()).abs() < 1e-14);
    }

    #[test]
    fn convex_quadratic_is_its_own_bound() {
        let tb = translation_bound_2d(
            |e| e.frob_dot(e),
            small_axes(),
            &DEFAULT_ALPHAS,
            &Default::default(),
        )
        .unwrap();
        for i in 0..tb.len() {
            assert!((tb.bound[i] - tb.f[i]).abs() < 1e-10);
            assert!((tb.envelope[i] - tb.f[i]).abs() < 1e-10);
        }
        assert_eq!(tb.alphas, DEFAULT_ALPHAS.to_vec());
    }

    #[test]
    fn sandwich_on_two_wells() {
        let w = two_well();
        let tb = translation_bound_2d(
            |e| w.eval(e),
            two_well_axes(48).unwrap(),
            &DEFAULT_ALPHAS,
            &Default::default(),
        )
        .unwrap();
        let slack = 1e-9 * tb.scale();
        for i in 0..tb.len() {
            assert!(tb.envelope[i] <= tb.bound[i] + slack);
            assert!(tb.bound[i] <= tb.f[i] + slack);
        }
        let mid = tb.index(23, 23, 23);
        assert_eq!(tb.point(mid), [0.0, 0.0, 0.0]);
        assert!(tb.bound[mid] <= 1e-3);
    }
}
