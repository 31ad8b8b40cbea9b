//! The full counterexample pipeline for `f0 - η|ε|²`.

use crate::quadform::{catalog, QuadForm};
use crate::roc::{
    compute_eta, is_sym_rank_one_convex, ConeSearch, EtaOptions, EtaResult, RankOneVerdict,
};
use crate::Result;

use super::{
    certify_3d, linear_system_refutation, Certify3dOptions, Certify3dReport, LinearSystemReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CounterexampleOptions {
    pub eta: EtaOptions,
    pub search: ConeSearch,
    pub certify: Certify3dOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub eta: EtaResult,
    pub form: QuadForm,
    pub rank_one: RankOneVerdict,
    pub certify: Certify3dReport,
    pub linear_system: LinearSystemReport,
    pub sr1c: bool,
    pub spc: bool,
    pub linear_system_inconsistent: bool,
    /// Set unless every step agrees with a separation of the two classes,
    /// or when η itself is flagged.
    pub flagged: bool,
}

/// Computes η, builds `f0 - η|ε|²`, then runs the rank-one test, the
/// translator search and the first-order linear system at the minimizer.
pub fn run_counterexample(opts: &CounterexampleOptions) -> Result<CounterexampleReport> {
    let eta = compute_eta(&opts.eta)?;
    let form = catalog::f_eta(eta.eta);
    let rank_one = is_sym_rank_one_convex(&form, &opts.search)?;
    let certify = certify_3d(&form, &opts.certify)?;
    let dir = eta.argmin.normalized().unwrap_or(eta.argmin);
    let linear_system = linear_system_refutation(&dir, eta.eta)?;
    let sr1c = rank_one.sr1c;
    let spc = certify.certificate.is_polyconvex();
    let linear_system_inconsistent = linear_system.inconsistent;
    let flagged = eta.flagged
        || certify.certificate.is_inconclusive()
        || !(sr1c && !spc && linear_system_inconsistent);
    Ok(CounterexampleReport {
        eta,
        form,
        rank_one,
        certify,
        linear_system,
        sr1c,
        spc,
        linear_system_inconsistent,
        flagged,
    })
}
