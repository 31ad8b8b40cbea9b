use std::path::Path;

use serde::Serialize;

use crate::json;
use crate::tensor::SymMat;
use crate::{Error, Result};

use super::Axis;

/// Multi-well energy `min_i μ_i |ε - w_i|²` on 2×2 strains; wells are given
/// in embedded coordinates `(ε11, ε22, √2 ε12)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Wells {
    pub wells: Vec<[f64; 3]>,
    pub moduli: Vec<f64>,
}

impl Wells {
    pub fn new(wells: Vec<[f64; 3]>, moduli: Vec<f64>) -> Result<Self> {
        let w = Wells { wells, moduli };
        w.validate()?;
        Ok(w)
    }

    fn validate(&self) -> Result<()> {
        if self.wells.is_empty() {
            return Err(Error::InvalidArgument(
                "field `wells`: at least one well is required".into(),
            ));
        }
        if self.wells.len() != self.moduli.len() {
            return Err(Error::InvalidArgument(format!(
                "field `moduli`: expected {} entries (one per well), got {}",
                self.wells.len(),
                self.moduli.len()
            )));
        }
        if self.wells.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "field `wells`: entries must be finite".into(),
            ));
        }
        if self.moduli.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::InvalidArgument(
                "field `moduli`: entries must be positive and finite".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parse = || -> std::result::Result<(Vec<[f64; 3]>, Vec<f64>), String> {
            let obj = json::object(text, &["wells", "moduli"], "wells")?;
            Ok((
                json::required(&obj, "wells")?,
                json::required(&obj, "moduli")?,
            ))
        };
        let (wells, moduli) = parse().map_err(Error::InvalidArgument)?;
        Wells::new(wells, moduli)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn eval_embedded(&self, x: &[f64]) -> f64 {
        self.wells
            .iter()
            .zip(&self.moduli)
            .map(|(w, m)| m * w.iter().zip(x).map(|(a, b)| (b - a).powi(2)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn eval(&self, eps: &SymMat<2>) -> f64 {
        self.eval_embedded(&eps.embed())
    }
}

/// Two unit-modulus wells at `±e1⊙e2`, which are compatible with each other.
pub fn two_well() -> Wells {
    let w = 1.0 / 2f64.sqrt();
    Wells {
        wells: vec![[0.0, 0.0, w], [0.0, 0.0, -w]],
        moduli: vec![1.0, 1.0],
    }
}

/// Grid for the two-well fixture: spacing `1/(21√2)` so that the origin and
/// both wells are nodes, `res` nodes per axis centred on the origin.
pub fn two_well_axes(res: usize) -> Result<[Axis; 3]> {
    if res < 4 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least 4, got {res}"
        )));
    }
    let h = 1.0 / (21.0 * 2f64.sqrt());
    let below = (res as f64 / 2.0 - 1.0).floor();
    let axis = Axis {
        start: -below * h,
        step: h,
        len: res,
    };
    Ok([axis; 3])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_wells_are_nodes() {
        let axes = two_well_axes(64).unwrap();
        let a = axes[2];
        assert_eq!(a.len, 64);
        assert!(a.node(31).abs() < 1e-15);
        assert!((a.node(52) - 1.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((a.node(10) + 1.0 / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn two_well_values() {
        let w = two_well();
        let e1 = SymMat::<2>::odot(&[1.0, 0.0], &[0.0, 1.0]);
        assert!(w.eval(&e1).abs() < 1e-15);
        assert!(w.eval(&(-e1)).abs() < 1e-15);
        assert!((w.eval(&SymMat::zeros()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn json_errors_name_the_field() {
        let err = Wells::from_json(r#"{"wells": [[0,0,1]], "moduli": []}"#).unwrap_err();
        assert!(err.to_string().contains("`moduli`"), "{err}");
        let err = Wells::from_json(r#"{"wells": [], "moduli": []}"#).unwrap_err();
        assert!(err.to_string().contains("`wells`"), "{err}");
        let err = Wells::from_json(r#"{"wells": [[0,0]], "moduli": [1]}"#).unwrap_err();
        assert!(err.to_string().contains("`wells`"), "{err}");
        let ok = Wells::from_json(r#"{"wells": [[0,0,1]], "moduli": [2]}"#).unwrap();
        assert_eq!(ok.moduli, vec![2.0]);
    }
}
