use crate::tensor::{CompatDir, SymMat};
use crate::{Error, Result};

/// Samples of `t ↦ f(base + t a⊙b)` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalScan<const D: usize> {
    pub base: SymMat<D>,
    pub dir: CompatDir<D>,
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    /// `second_differences[k] = values[k+2] - 2 values[k+1] + values[k]`,
    /// centered at `ts[k+1]`.
    pub second_differences: Vec<f64>,
    pub verdict: ScanVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanVerdict {
    /// Most negative second difference, at `t`.
    NonconvexWitness {
        t: f64,
        second_difference: f64,
    },
    NoViolationFound,
}

impl ScanVerdict {
    pub fn is_witness(&self) -> bool {
        matches!(self, ScanVerdict::NonconvexWitness { .. })
    }
}

/// Samples `f` along the compatible line through `base` in direction `dir`
/// and looks for negative second differences below `-1e-9 · max|values|`.
pub fn directional_convexity_scan<const D: usize, F>(
    f: F,
    base: &SymMat<D>,
    dir: &CompatDir<D>,
    t_range: (f64, f64),
    n_samples: usize,
) -> Result<DirectionalScan<D>>
where
    F: Fn(&SymMat<D>) -> f64,
{
    if n_samples < 5 {
        return Err(Error::InvalidArgument(format!(
            "directional scan needs at least 5 samples, got {n_samples}"
        )));
    }
    let (t0, t1) = t_range;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::InvalidArgument(format!(
            "invalid t range [{t0}, {t1}]"
        )));
    }
    let step = (t1 - t0) / (n_samples - 1) as f64;
    let line = dir.odot();
    let ts: Vec<f64> = (0..n_samples).map(|i| t0 + step * i as f64).collect();
    let values: Vec<f64> = ts.iter().map(|&t| f(&(*base + line * t))).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("directional_convexity_scan"));
    }
    let second_differences: Vec<f64> = values
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .collect();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (k, worst) = second_differences
        .iter()
        .copied()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("at least three samples");
    let verdict = if worst < -1e-9 * scale {
        ScanVerdict::NonconvexWitness {
            t: ts[k + 1],
            second_difference: worst,
        }
    } else {
        ScanVerdict::NoViolationFound
    };
    Ok(DirectionalScan {
        base: *base,
        dir: *dir,
        ts,
        values,
        second_differences,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadform::catalog;

    #[test]
    fn sverak_2d_profile_is_not_convex() {
        let f = catalog::sverak_2d();
        let dir = CompatDir::new([2.0, 0.0], [0.0, 1.0]);
        let scan =
            directional_convexity_scan(|e| f.eval(e), &SymMat::identity(), &dir, (-2.0, 2.0), 401)
                .unwrap();
        for (t, v) in scan.ts.iter().zip(&scan.values) {
            let expected = if t.abs() < 1.0 { 1.0 - t * t } else { 0.0 };
            assert!((v - expected).abs() < 1e-12, "t = {t}");
        }
        assert!(scan.verdict.is_witness());
    }

    #[test]
    fn det_3d_scans() {
        let det = catalog::det_3d();
        let dir = CompatDir::new([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let scan =
            directional_convexity_scan(|e| det.eval(e), &SymMat::identity(), &dir, (-1.0, 1.0), 21)
                .unwrap();
        // det(I + t a⊙b) = 1 - t²/4 here, so the second difference is -Δt²/2.
        let dt = 0.1;
        for d in &scan.second_differences {
            assert!((d + 0.5 * dt * dt).abs() < 1e-13);
        }
        assert!(scan.verdict.is_witness());

        let neg = catalog::neg_det_3d();
        let scan = directional_convexity_scan(
            |e| neg.eval(e),
            &(-SymMat::<3>::identity()),
            &dir,
            (-1.0, 1.0),
            21,
        )
        .unwrap();
        assert!(scan.verdict.is_witness());
    }

    #[test]
    fn convex_function_has_no_witness() {
        let f = crate::quadform::QuadForm::norm_sq(3);
        let dir = CompatDir::new([1.0, 2.0, 0.0], [0.0, 1.0, 1.0]);
        let scan =
            directional_convexity_scan(|e| f.eval(e), &SymMat::identity(), &dir, (-1.0, 1.0), 11)
                .unwrap();
        assert_eq!(scan.verdict, ScanVerdict::NoViolationFound);
        for (k, d) in scan.second_differences.iter().enumerate() {
            let v = &scan.values;
            assert_eq!(*d, v[k + 2] - 2.0 * v[k + 1] + v[k]);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let dir = CompatDir::new([1.0, 0.0], [0.0, 1.0]);
        let base = SymMat::<2>::zeros();
        assert!(directional_convexity_scan(|_| 0.0, &base, &dir, (0.0, 1.0), 4).is_err());
        assert!(matches!(
            directional_convexity_scan(|_| f64::NAN, &base, &dir, (0.0, 1.0), 5),
            Err(Error::NonFinite(_))
        ));
    }
}
