//! JSON renderings of the library results.

use serde_json::{json, Value};
use symconv::polycert::{
    Certificate2d, Certificate3d, Certify3dReport, Classification, CounterexampleReport,
    LinearSystemReport, PolyCertificate, INCONCLUSIVE_BAND, POLYCONVEX_TOL, RANK_TOL,
};
use symconv::quadform::{QuadForm, CONVEXITY_TOL};
use symconv::roc::{EtaResult, RankOneVerdict, SR1C_TOL};
use symconv::tensor::{CompatDir, SymMat};

pub fn tolerances() -> Value {
    json!({
        "convexity": CONVEXITY_TOL,
        "polyconvex": POLYCONVEX_TOL,
        "inconclusive_band": INCONCLUSIVE_BAND,
        "sr1c": SR1C_TOL,
        "rank": RANK_TOL,
    })
}

fn sym3(a: &SymMat<3>) -> Value {
    json!(a.as_array())
}

fn dir<const D: usize>(d: &CompatDir<D>) -> Value {
    json!({ "a": d.a.to_vec(), "b": d.b.to_vec() })
}

/// Infinite gaps (restart searches) are written as `null`.
fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn form(f: &QuadForm) -> Value {
    json!({ "dim": f.dim(), "label": f.label(), "coeffs": f.upper() })
}

pub fn rank_one(v: &RankOneVerdict) -> Value {
    let (a, b) = v.search.argmin_vectors();
    json!({
        "sr1c": v.sr1c,
        "min_value": v.search.min_value(),
        "argmin_a": a,
        "argmin_b": b,
        "certified_gap": finite_or_null(v.search.certified_gap()),
    })
}

fn certificate_2d(c: &Certificate2d) -> Value {
    match c {
        Certificate2d::Polyconvex { alpha, margin } => {
            json!({ "kind": "alpha", "alpha": alpha, "margin": margin })
        }
        Certificate2d::Refuted {
            best_alpha,
            margin,
            witness,
        } => json!({
            "kind": "refuted",
            "best_alpha": best_alpha,
            "margin": margin,
            "witness": witness.map(|(d, v)| json!({ "direction": dir(&d), "value": v })),
        }),
    }
}

pub fn certify_3d(r: &Certify3dReport) -> Value {
    let (kind, status) = match &r.certificate {
        Certificate3d::Polyconvex { .. } => ("translator", "polyconvex"),
        Certificate3d::NumericallyRefuted {
            inconclusive: true, ..
        } => ("refuted", "inconclusive"),
        Certificate3d::NumericallyRefuted { .. } => ("refuted", "numerically_refuted"),
        Certificate3d::LinearSystemRefuted(_) => ("refuted", "linear_system_refuted"),
    };
    json!({
        "kind": kind,
        "status": status,
        "A": sym3(&r.best_a),
        "A_norm": r.best_a.norm(),
        "phi": r.best_phi,
        "ascent_phi": r.ascent_phi,
        "refined_phi": r.refined_phi,
        "best_restart": r.best_restart,
        "restart_phis": r.restart_phis,
    })
}

pub fn classification(c: &Classification) -> Value {
    let certificate = match &c.polyconvexity {
        None => json!({ "kind": "convex", "min_eigenvalue": c.convexity.min_eigenvalue }),
        Some(PolyCertificate::D2(cert)) => certificate_2d(cert),
        Some(PolyCertificate::D3(r)) => certify_3d(r),
    };
    json!({
        "class": c.class.as_str(),
        "convexity": { "convex": c.convexity.convex, "min_eigenvalue": c.convexity.min_eigenvalue },
        "certificate": certificate,
        "rank_one": c.rank_one.as_ref().map(rank_one),
        "inconclusive": c.inconclusive,
    })
}

pub fn eta(r: &EtaResult) -> Value {
    json!({
        "eta": r.eta,
        "argmin_a": r.argmin.a.to_vec(),
        "argmin_b": r.argmin.b.to_vec(),
        "grid": r.grid,
        "certified_gap": finite_or_null(r.certified_gap),
        "restarts_eta": r.restarts_eta,
        "checks": {
            "lemma_structure": if r.structure.passed { "pass" } else { "fail" },
            "structure": r.structure,
            "eta_upper_bound": if r.eta <= 1.0 / 3.0 + 1e-9 { "pass" } else { "fail" },
        },
        "flagged": r.flagged,
    })
}

pub fn linear_system(r: &LinearSystemReport) -> Value {
    json!({
        "L": r.system.l,
        "c": r.system.c,
        "rank_L": r.rank_l,
        "rank_Lc": r.rank_aug,
        "inconsistent": r.inconsistent,
        "lstsq": r.lstsq,
        "residual": r.residual,
    })
}

pub fn counterexample(r: &CounterexampleReport) -> Value {
    json!({
        "eta": eta(&r.eta),
        "form": form(&r.form),
        "sr1c": r.sr1c,
        "spc": r.spc,
        "linear_system_inconsistent": r.linear_system_inconsistent,
        "rank_one": rank_one(&r.rank_one),
        "certify_3d": certify_3d(&r.certify),
        "linear_system": linear_system(&r.linear_system),
        "flagged": r.flagged,
    })
}
