//! Symmetric polyconvexity of quadratic forms.
//!
//! In 2d a form is symmetric polyconvex iff `f + α det ≥ 0` for some
//! `α ≥ 0`; in 3d iff `f + A:cof ε ≥ 0` for some positive semi-definite `A`.
//! Both translators are searched by maximizing the smallest eigenvalue of the
//! translated coefficient matrix.

mod barrier;
mod counterexample;
mod linear_system;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::quadform::{det2_matrix, Convexity, QuadForm, CONVEXITY_TOL};
use crate::roc::{is_sym_rank_one_convex, min_over_compatible, ConeSearch, RankOneVerdict};
use crate::tensor::{eig_sym, min_eigenvalue, CompatDir, SymMat};
use crate::{Error, Result};

pub use crate::quadform::cof_translator_matrix;
pub use counterexample::{run_counterexample, CounterexampleOptions, CounterexampleReport};
pub use linear_system::{
    build_linear_system, linear_system_refutation, LinearSystem, LinearSystemReport, RANK_TOL,
};

/// Translator margin needed for a polyconvexity certificate.
pub const POLYCONVEX_TOL: f64 = 1e-9;
/// Margins in `(-INCONCLUSIVE_BAND, -POLYCONVEX_TOL)` are reported as
/// inconclusive rather than refuted.
pub const INCONCLUSIVE_BAND: f64 = 1e-7;

fn require_dim(f: &QuadForm, d: usize) -> Result<()> {
    if f.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: f.dim(),
        });
    }
    Ok(())
}

/// `λ_min(Q_f + α Q_det)` for a 2d form.
pub fn translator_margin_2d(f: &QuadForm, alpha: f64) -> f64 {
    let q: Vec<f64> = f
        .coeffs()
        .iter()
        .zip(det2_matrix())
        .map(|(x, d)| x + alpha * d)
        .collect();
    min_eigenvalue(3, &q).expect("finite coefficients")
}

/// `λ_min(Q_f + C(A))` for a 3d form.
pub fn translator_margin_3d(f: &QuadForm, a: &SymMat<3>) -> f64 {
    let q = translated(f.coeffs(), a);
    min_eigenvalue(6, &q).expect("finite coefficients")
}

fn translated(q: &[f64], a: &SymMat<3>) -> Vec<f64> {
    q.iter()
        .zip(cof_translator_matrix(a))
        .map(|(x, c)| x + c)
        .collect()
}

/// Outcome of the 2d translator search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Certificate2d {
    Polyconvex {
        alpha: f64,
        margin: f64,
    },
    /// No `α ≥ 0` reaches a nonnegative margin. `witness` is a compatible
    /// direction with `f(a⊙b) < 0` when the cone search finds one; since
    /// `det(a⊙b) ≤ 0`, it refutes every translator at once.
    Refuted {
        best_alpha: f64,
        margin: f64,
        witness: Option<(CompatDir<2>, f64)>,
    },
}

impl Certificate2d {
    pub fn is_polyconvex(&self) -> bool {
        matches!(self, Certificate2d::Polyconvex { .. })
    }

    pub fn margin(&self) -> f64 {
        match *self {
            Certificate2d::Polyconvex { margin, .. } | Certificate2d::Refuted { margin, .. } => {
                margin
            }
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            Certificate2d::Polyconvex { alpha, .. } => alpha,
            Certificate2d::Refuted { best_alpha, .. } => best_alpha,
        }
    }
}

fn golden_max<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    let tol = 1e-13 * hi.max(1.0);
    while hi - lo > tol {
        if g1 < g2 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + r * (hi - lo);
            g2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - r * (hi - lo);
            g1 = g(x1);
        }
    }
    if g1 >= g2 {
        (x1, g1)
    } else {
        (x2, g2)
    }
}

/// Maximizes the concave function `α ↦ λ_min(Q_f + α Q_det)` over `α ≥ 0`
/// by golden-section search on `[0, α_max]`, where `α_max` doubles from 1
/// while the objective still increases at the boundary.
pub fn certify_2d(f: &QuadForm) -> Result<Certificate2d> {
    require_dim(f, 2)?;
    let g = |alpha: f64| translator_margin_2d(f, alpha);
    let mut alpha_max = 1.0;
    while g(2.0 * alpha_max) >= g(alpha_max) && alpha_max < 1e12 {
        alpha_max *= 2.0;
    }
    let (mut alpha, mut margin) = golden_max(g, 0.0, 2.0 * alpha_max);
    let at_zero = g(0.0);
    if at_zero >= margin {
        alpha = 0.0;
        margin = at_zero;
    }
    if margin >= -POLYCONVEX_TOL {
        return Ok(Certificate2d::Polyconvex { alpha, margin });
    }
    let search = min_over_compatible::<2>(f, &ConeSearch::default())?;
    let witness = (search.min_value < 0.0).then_some((search.argmin, search.min_value));
    Ok(Certificate2d::Refuted {
        best_alpha: alpha,
        margin,
        witness,
    })
}

/// Options of the 3d translator search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certify3dOptions {
    pub restarts: usize,
    /// Total supergradient iterations, split evenly over the restarts.
    pub iterations: usize,
    pub seed: u64,
    /// Finish with the log-barrier Newton refinement.
    pub refine: bool,
}

impl Default for Certify3dOptions {
    fn default() -> Self {
        Certify3dOptions {
            restarts: 20,
            iterations: 50_000,
            seed: 0,
            refine: true,
        }
    }
}

/// Outcome of the 3d translator search.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate3d {
    Polyconvex {
        a: SymMat<3>,
        phi: f64,
    },
    /// Best translator found still leaves a negative margin. Margins within
    /// `(-1e-7, -1e-9)` are marked inconclusive.
    NumericallyRefuted {
        best_a: SymMat<3>,
        best_phi: f64,
        inconclusive: bool,
    },
    /// The first-order optimality system at a compatible minimizer has no
    /// solution.
    LinearSystemRefuted(LinearSystemReport),
}

impl Certificate3d {
    pub fn is_polyconvex(&self) -> bool {
        matches!(self, Certificate3d::Polyconvex { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(
            self,
            Certificate3d::NumericallyRefuted {
                inconclusive: true,
                ..
            }
        )
    }
}

/// Full record of a 3d translator search.
#[derive(Debug, Clone, PartialEq)]
pub struct Certify3dReport {
    pub certificate: Certificate3d,
    pub best_a: SymMat<3>,
    pub best_phi: f64,
    /// Best margin of each supergradient restart, in restart order.
    pub restart_phis: Vec<f64>,
    pub best_restart: usize,
    /// Best margin of the supergradient phase alone.
    pub ascent_phi: f64,
    /// Margin after the barrier refinement, when run.
    pub refined_phi: Option<f64>,
}

/// Largest useful translator eigenvalue: if `λ_max(A) = μ`, taking `a⊙b`
/// with orthonormal `a, b` and `a×b` along the top eigenvector gives
/// `φ(A) ≤ λ_max(Q) - μ/2`, while `φ(0) = λ_min(Q)`.
fn translator_bound(q: &[f64]) -> f64 {
    let e = eig_sym(6, q).expect("finite coefficients");
    2.0 * (e.values[5] - e.values[0])
}

/// Projection onto `{A : 0 ⪯ A ⪯ bound·I}` by eigenvalue clipping.
fn project(a: &SymMat<3>, bound: f64) -> SymMat<3> {
    let flat: Vec<f64> = a.as_array().iter().flatten().copied().collect();
    let e = eig_sym(3, &flat).expect("finite translator");
    let mut out = SymMat::zeros();
    for (val, v) in e.values.iter().zip(&e.vectors) {
        let c = val.clamp(0.0, bound);
        if c != 0.0 {
            out = out + SymMat::from_fn(|i, j| v[i] * v[j]) * c;
        }
    }
    out
}

/// `φ(A)` and a supergradient: `cof ε_v` for a unit eigenvector `v` of the
/// smallest eigenvalue, averaged over the eigenspace within `1e-10·scale`.
fn phi_supergradient(q: &[f64], a: &SymMat<3>, scale: f64) -> (f64, SymMat<3>) {
    let m = translated(q, a);
    let e = eig_sym(6, &m).expect("finite coefficients");
    let lmin = e.values[0];
    let near: Vec<&Vec<f64>> = e
        .values
        .iter()
        .zip(&e.vectors)
        .take_while(|(v, _)| **v <= lmin + 1e-10 * scale)
        .map(|(_, vec)| vec)
        .collect();
    let mut g = SymMat::zeros();
    for v in &near {
        g = g + SymMat::<3>::from_embedded(v).cof();
    }
    (lmin, g * (1.0 / near.len() as f64))
}

fn random_psd(rng: &mut ChaCha8Rng, bound: f64) -> SymMat<3> {
    let m: [[f64; 3]; 3] =
        std::array::from_fn(|_| std::array::from_fn(|_| StandardNormal.sample(rng)));
    let mmt = SymMat::from_fn(|i, j| (0..3).map(|k| m[i][k] * m[j][k]).sum());
    let top = mmt.eigenvalues()[2];
    let u: f64 = rand::Rng::gen_range(rng, 0.05..1.0);
    mmt * (u * bound / top)
}

fn ascend(
    q: &[f64],
    start: SymMat<3>,
    step0: f64,
    iters: usize,
    bound: f64,
    scale: f64,
) -> (f64, SymMat<3>) {
    let mut a = project(&start, bound);
    let (mut phi, mut g) = phi_supergradient(q, &a, scale);
    let mut best = (phi, a);
    for k in 1..=iters {
        let gn = g.norm();
        if gn == 0.0 {
            break;
        }
        a = project(&(a + g * (step0 / (k as f64 * gn))), bound);
        (phi, g) = phi_supergradient(q, &a, scale);
        if phi > best.0 {
            best = (phi, a);
        }
    }
    best
}

/// Maximizes `φ(A) = λ_min(Q_f + C(A))` over positive semi-definite `A`.
///
/// Projected supergradient ascent with steps `s_r / k` runs from `A = 0`,
/// `A = I` and random positive semi-definite starts (`s_r` cycles through
/// `|Q|·2^{r mod 5}/4`); restarts are merged by largest margin, ties going to
/// the lowest restart index. The best iterate then seeds a log-barrier
/// Newton refinement, which reaches the optimum to about `1e-11`.
pub fn certify_3d(f: &QuadForm, opts: &Certify3dOptions) -> Result<Certify3dReport> {
    require_dim(f, 3)?;
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument(
            "restart count must be positive".into(),
        ));
    }
    let q = f.coeffs();
    let scale = f.norm().max(1.0);
    let bound = translator_bound(q).max(1e-12);
    let per_restart = (opts.iterations / opts.restarts).max(1);

    let runs: Vec<(f64, SymMat<3>)> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let start = match r {
                0 => SymMat::zeros(),
                1 => SymMat::identity(),
                _ => {
                    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                    rng.set_stream(r as u64);
                    random_psd(&mut rng, bound)
                }
            };
            let step0 = scale * f64::powi(2.0, (r % 5) as i32) / 4.0;
            ascend(q, start, step0, per_restart, bound, scale)
        })
        .collect();
    let restart_phis: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let mut best_restart = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.0 > runs[best_restart].0 {
            best_restart = i;
        }
    }
    let (ascent_phi, ascent_a) = runs[best_restart];

    let mut best_phi = ascent_phi;
    let mut best_a = ascent_a;
    let mut refined_phi = None;
    if opts.refine {
        if let Some(a) = barrier::barrier_maximize(q, &ascent_a, f.norm()) {
            let a = project(&a, f64::INFINITY);
            let phi = translator_margin_3d(f, &a);
            refined_phi = Some(phi);
            if phi > best_phi {
                best_phi = phi;
                best_a = a;
            }
        }
    }

    let certificate = if best_phi >= -POLYCONVEX_TOL {
        Certificate3d::Polyconvex {
            a: best_a,
            phi: best_phi,
        }
    } else {
        Certificate3d::NumericallyRefuted {
            best_a,
            best_phi,
            inconclusive: best_phi > -INCONCLUSIVE_BAND,
        }
    };
    Ok(Certify3dReport {
        certificate,
        best_a,
        best_phi,
        restart_phis,
        best_restart,
        ascent_phi,
        refined_phi,
    })
}

/// Generalized convexity classes of a quadratic form, weakest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityClass {
    None,
    SymmetricRankOneConvex,
    SymmetricPolyconvex,
    Convex,
}

impl ConvexityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConvexityClass::None => "none",
            ConvexityClass::SymmetricRankOneConvex => "symmetric_rank_one_convex",
            ConvexityClass::SymmetricPolyconvex => "symmetric_polyconvex",
            ConvexityClass::Convex => "convex",
        }
    }
}

/// Polyconvexity certificate of either dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum PolyCertificate {
    D2(Certificate2d),
    D3(Certify3dReport),
}

impl PolyCertificate {
    pub fn is_polyconvex(&self) -> bool {
        match self {
            PolyCertificate::D2(c) => c.is_polyconvex(),
            PolyCertificate::D3(r) => r.certificate.is_polyconvex(),
        }
    }

    pub fn is_inconclusive(&self) -> bool {
        match self {
            PolyCertificate::D2(_) => false,
            PolyCertificate::D3(r) => r.certificate.is_inconclusive(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassifyOptions {
    pub search: ConeSearch,
    pub certify: Certify3dOptions,
}

/// Strongest certified class plus the evidence at each boundary: the
/// convexity test always, the polyconvexity certificate when the form is not
/// convex, the compatible-cone search when it is not polyconvex.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class: ConvexityClass,
    pub convexity: Convexity,
    pub polyconvexity: Option<PolyCertificate>,
    pub rank_one: Option<RankOneVerdict>,
    /// The 3d translator margin fell into the inconclusive band.
    pub inconclusive: bool,
}

fn polyconvexity(f: &QuadForm, opts: &ClassifyOptions) -> Result<PolyCertificate> {
    Ok(match f.dim() {
        2 => PolyCertificate::D2(certify_2d(f)?),
        _ => PolyCertificate::D3(certify_3d(f, &opts.certify)?),
    })
}

pub fn classify(f: &QuadForm, opts: &ClassifyOptions) -> Result<Classification> {
    let convexity = f.is_convex();
    let mut out = Classification {
        class: ConvexityClass::Convex,
        convexity,
        polyconvexity: None,
        rank_one: None,
        inconclusive: false,
    };
    if convexity.convex {
        return Ok(out);
    }
    let cert = polyconvexity(f, opts)?;
    out.inconclusive = cert.is_inconclusive();
    let spc = cert.is_polyconvex();
    out.polyconvexity = Some(cert);
    if spc {
        out.class = ConvexityClass::SymmetricPolyconvex;
        return Ok(out);
    }
    let verdict = is_sym_rank_one_convex(f, &opts.search)?;
    out.class = if verdict.sr1c {
        ConvexityClass::SymmetricRankOneConvex
    } else {
        ConvexityClass::None
    };
    out.rank_one = Some(verdict);
    Ok(out)
}

/// Convex or carrying a polyconvexity certificate.
pub fn is_sym_polyconvex(f: &QuadForm, opts: &ClassifyOptions) -> Result<bool> {
    Ok(f.is_convex().convex || polyconvexity(f, opts)?.is_polyconvex())
}

/// A quadratic energy is symmetric polyaffine iff both it and its negative
/// are symmetric polyconvex. Affine terms never change (poly)convexity, so
/// an affine energy `B:ε + b` is passed through its zero quadratic part.
pub fn is_polyaffine(quadratic_part: &QuadForm, opts: &ClassifyOptions) -> Result<bool> {
    Ok(is_sym_polyconvex(quadratic_part, opts)?
        && is_sym_polyconvex(&quadratic_part.scaled(-1.0), opts)?)
}

/// The three properties of `ε ↦ -A:cof ε`, each decided by its own
/// procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorBTriple {
    pub sr1c: bool,
    pub spc: bool,
    pub psd: bool,
}

impl CorBTriple {
    pub fn agree(&self) -> bool {
        self.sr1c == self.spc && self.spc == self.psd
    }
}

/// `-A:cof ε` as a quadratic form.
pub fn neg_cof_form(a: &SymMat<3>) -> QuadForm {
    let q: Vec<f64> = cof_translator_matrix(a).iter().map(|c| -c).collect();
    QuadForm::from_matrix(3, q, "-A:cof eps").expect("finite translator")
}

pub fn cor_b_equivalence(a: &SymMat<3>, opts: &ClassifyOptions) -> Result<CorBTriple> {
    let f = neg_cof_form(a);
    let sr1c = is_sym_rank_one_convex(&f, &opts.search)?.sr1c;
    let spc = certify_3d(&f, &opts.certify)?.certificate.is_polyconvex();
    let psd = a.eigenvalues()[0] >= -CONVEXITY_TOL * a.norm();
    Ok(CorBTriple { sr1c, spc, psd })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadform::catalog;

    fn quick() -> ClassifyOptions {
        ClassifyOptions {
            search: ConeSearch::with_grid(32),
            certify: Certify3dOptions {
                iterations: 4000,
                ..Default::default()
            },
        }
    }

    #[test]
    fn certify_2d_examples() {
        match certify_2d(&catalog::neg_det_2d()).unwrap() {
            Certificate2d::Polyconvex { alpha, margin } => {
                assert!((alpha - 1.0).abs() < 1e-6, "{alpha}");
                assert!(margin.abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
        match certify_2d(&catalog::det_2d()).unwrap() {
            Certificate2d::Refuted {
                witness: Some((dir, value)),
                ..
            } => {
                assert!(value < 0.0);
                // f + α det at the witness is (1 + α) f(a⊙b) < 0 for all α ≥ 0.
                let e = dir.odot();
                for alpha in [0.0, 1.0, 10.0] {
                    assert!(e.det() * (1.0 + alpha) < 0.0);
                }
            }
            other => panic!("{other:?}"),
        }
        let g = catalog::trace_sq_minus_det_2d();
        assert!(certify_2d(&g).unwrap().is_polyconvex());
        assert!(translator_margin_2d(&g, 1.0) >= -1e-9);
        assert!(certify_2d(&catalog::f0()).is_err());
    }

    #[test]
    fn certify_3d_examples() {
        let opts = quick().certify;
        let r = certify_3d(&catalog::cof_entry(2, -1.0), &opts).unwrap();
        match r.certificate {
            Certificate3d::Polyconvex { a, phi } => {
                assert!(phi >= -1e-9);
                assert!((a - SymMat::diag([0.0, 0.0, 1.0])).norm() < 1e-4);
            }
            other => panic!("{other:?}"),
        }
        let r = certify_3d(&QuadForm::norm_sq(3), &opts).unwrap();
        match r.certificate {
            Certificate3d::Polyconvex { a, phi } => {
                assert!(phi >= 1.0 - 1e-9);
                assert!(a.norm() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
        let r = certify_3d(&catalog::cof_entry(2, 1.0), &opts).unwrap();
        assert!(!r.certificate.is_polyconvex());
        assert_eq!(r.restart_phis.len(), 20);
    }

    #[test]
    fn projection_clips_spectrum() {
        let a = SymMat::diag([-1.0, 0.5, 3.0]);
        let p = project(&a, 2.0);
        assert!((p - SymMat::diag([0.0, 0.5, 2.0])).norm() < 1e-14);
    }

    #[test]
    fn supergradient_is_a_directional_derivative() {
        let f = catalog::f0();
        let a =
            SymMat::diag([0.3, 0.2, 0.4]) + SymMat::from_fn(|i, j| if i != j { 0.05 } else { 0.0 });
        let (phi, g) = phi_supergradient(f.coeffs(), &a, f.norm());
        let dir = SymMat::from_fn(|i, j| 0.1 * (1 + i + 2 * j) as f64);
        let h = 1e-7;
        let fd = (translator_margin_3d(&f, &(a + dir * h)) - phi) / h;
        // Concavity: φ(A + hD) ≤ φ(A) + h G:D.
        assert!(fd <= g.frob_dot(&dir) + 1e-5);
    }

    #[test]
    fn classification_ladder() {
        let opts = quick();
        assert_eq!(
            classify(&QuadForm::norm_sq(3), &opts).unwrap().class,
            ConvexityClass::Convex
        );
        assert_eq!(
            classify(&QuadForm::zero(2), &opts).unwrap().class,
            ConvexityClass::Convex
        );
        let c = classify(&catalog::neg_det_2d(), &opts).unwrap();
        assert_eq!(c.class, ConvexityClass::SymmetricPolyconvex);
        assert!(!c.convexity.convex);
        let c = classify(&catalog::det_2d(), &opts).unwrap();
        assert_eq!(c.class, ConvexityClass::None);
        assert!(c.rank_one.is_some());
        assert!(ConvexityClass::None < ConvexityClass::SymmetricRankOneConvex);
        assert!(ConvexityClass::SymmetricPolyconvex < ConvexityClass::Convex);
    }

    #[test]
    fn polyaffine_examples() {
        let opts = quick();
        assert!(is_polyaffine(&QuadForm::zero(2), &opts).unwrap());
        assert!(is_polyaffine(&QuadForm::zero(3), &opts).unwrap());
        assert!(!is_polyaffine(&catalog::neg_det_2d(), &opts).unwrap());
    }

    #[test]
    fn cor_b_examples() {
        let opts = quick();
        let t = cor_b_equivalence(&SymMat::identity(), &opts).unwrap();
        assert_eq!(
            t,
            CorBTriple {
                sr1c: true,
                spc: true,
                psd: true
            }
        );
        let t = cor_b_equivalence(&SymMat::diag([1.0, 1.0, -1.0]), &opts).unwrap();
        assert_eq!(
            t,
            CorBTriple {
                sr1c: false,
                spc: false,
                psd: false
            }
        );
    }
}
