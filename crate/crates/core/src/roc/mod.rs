//! Symmetric rank-one convexity: global minimization of quadratic forms over
//! the compatible unit set `{a⊙b : |a⊙b| = 1}`, directional convexity scans
//! for general functions, and the constant η of the auxiliary form `f0`.

mod scan;
pub(crate) mod sphere;
mod structure;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::optim::nelder_mead;
use crate::quadform::{catalog, QuadForm};
use crate::tensor::{CompatDir, Vector};
use crate::{Error, Result};

pub use scan::{directional_convexity_scan, DirectionalScan, ScanVerdict};
pub use structure::{minimizer_structure_check, StructureReport};

use sphere::{
    angles_from_point, canonical, covering_radius, gradient_descent, newton_refine,
    point_from_angles, ratio, sphere_grid, Pencil,
};

/// Absolute threshold on the compatible minimum for a rank-one convex verdict.
pub const SR1C_TOL: f64 = 1e-9;

/// How a [`ConeMinResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    GridPolish,
    Restarts,
}

/// Options of the grid search with local polish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeSearch {
    /// Azimuth steps per sphere; 3d grids use `grid / 2` polar rings.
    pub grid: usize,
    /// Nelder–Mead iterations per polish round.
    pub polish_iters: usize,
    pub polish_rounds: usize,
    /// Number of best grid cells that are polished.
    pub candidates: usize,
    /// Newton iterations after the polish (0 disables).
    pub newton_iters: usize,
}

impl Default for ConeSearch {
    fn default() -> Self {
        ConeSearch {
            grid: 64,
            polish_iters: 200,
            polish_rounds: 4,
            candidates: 6,
            newton_iters: 20,
        }
    }
}

impl ConeSearch {
    pub fn with_grid(grid: usize) -> Self {
        ConeSearch {
            grid,
            ..Self::default()
        }
    }
}

/// Best compatible direction found for a quadratic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeMinResult<const D: usize> {
    /// `f(argmin.odot())`.
    pub min_value: f64,
    /// Normalized so that `|a⊙b| = 1`.
    pub argmin: CompatDir<D>,
    pub method: SearchMethod,
    /// Azimuth steps of the grid (0 for the restart route).
    pub grid_resolution: usize,
    /// Upper bound on how far the grid minimum can exceed the true minimum;
    /// infinite for the restart route, which carries no certificate.
    pub certified_gap: f64,
}

/// Compatible minimum of a form of either dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConeMin {
    D2(ConeMinResult<2>),
    D3(ConeMinResult<3>),
}

impl ConeMin {
    pub fn min_value(&self) -> f64 {
        match self {
            ConeMin::D2(r) => r.min_value,
            ConeMin::D3(r) => r.min_value,
        }
    }

    pub fn certified_gap(&self) -> f64 {
        match self {
            ConeMin::D2(r) => r.certified_gap,
            ConeMin::D3(r) => r.certified_gap,
        }
    }

    /// `(a, b)` of the argmin as plain vectors.
    pub fn argmin_vectors(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ConeMin::D2(r) => (r.argmin.a.to_vec(), r.argmin.b.to_vec()),
            ConeMin::D3(r) => (r.argmin.a.to_vec(), r.argmin.b.to_vec()),
        }
    }

    /// Embedded coordinates of the argmin `a⊙b`.
    pub fn argmin_embedded(&self) -> Vec<f64> {
        match self {
            ConeMin::D2(r) => r.argmin.odot().embed(),
            ConeMin::D3(r) => r.argmin.odot().embed(),
        }
    }
}

fn check_dim<const D: usize>(f: &QuadForm) -> Result<()> {
    if f.dim() != D {
        return Err(Error::DimensionMismatch {
            expected: D,
            found: f.dim(),
        });
    }
    Ok(())
}

/// Orders candidates by value, breaking near-ties by the lexicographically
/// smallest embedded argmin.
fn better<const D: usize>(x: &(f64, CompatDir<D>), y: &(f64, CompatDir<D>), scale: f64) -> bool {
    let tie = 1e-13 * scale.max(1.0);
    if x.0 < y.0 - tie {
        return true;
    }
    if x.0 > y.0 + tie {
        return false;
    }
    let ex = x.1.odot().embed();
    let ey = y.1.odot().embed();
    for (u, v) in ex.iter().zip(&ey) {
        match u.total_cmp(v) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

fn finalize<const D: usize>(
    f: &QuadForm,
    a: Vector<D>,
    b: Vector<D>,
) -> Option<(f64, CompatDir<D>)> {
    let dir = canonical(a, b)?;
    Some((f.eval(&dir.odot()), dir))
}

/// Minimizes `f(a⊙b) / |a⊙b|²` over unit `a`, `b` by an exhaustive angular
/// grid (antipodal duplicates of `a` removed), a Nelder–Mead polish of the
/// best cells in angle coordinates, and a final Riemannian Newton step.
pub fn min_over_compatible<const D: usize>(
    f: &QuadForm,
    opts: &ConeSearch,
) -> Result<ConeMinResult<D>> {
    check_dim::<D>(f)?;
    if opts.grid < 4 || opts.grid % 4 != 0 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution must be a positive multiple of 4, got {}",
            opts.grid
        )));
    }
    let a_nodes = sphere_grid::<D>(opts.grid, true);
    let b_nodes = sphere_grid::<D>(opts.grid, false);

    // Best b for every a; rows are merged in index order.
    let rows: Vec<Option<(f64, usize, usize)>> = a_nodes
        .par_iter()
        .enumerate()
        .map(|(ia, na)| {
            let pencil = Pencil::new(f, na);
            let mut best: Option<(f64, usize)> = None;
            for (ib, nb) in b_nodes.iter().enumerate() {
                let den = Pencil::quad(&pencil.n, nb);
                if den <= 1e-16 {
                    continue;
                }
                let r = Pencil::quad(&pencil.p, nb) / den;
                if best.map_or(true, |(v, _)| r < v) {
                    best = Some((r, ib));
                }
            }
            best.map(|(v, ib)| (v, ia, ib))
        })
        .collect();
    let mut cells: Vec<(f64, usize, usize)> = rows.into_iter().flatten().collect();
    if cells.is_empty() {
        return Err(Error::DegenerateGrid);
    }
    cells.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    cells.truncate(opts.candidates.max(1));

    let eig = f.eigen();
    let spread = eig.values[eig.values.len() - 1] - eig.values[0];
    let scale = f.norm();

    let polished: Vec<Option<(f64, CompatDir<D>)>> = cells
        .par_iter()
        .map(|&(_, ia, ib)| {
            let (a, b) = polish(f, &a_nodes[ia], &b_nodes[ib], opts);
            let (a, b) = if opts.newton_iters > 0 {
                newton_refine(f, a, b, opts.newton_iters)
            } else {
                (a, b)
            };
            finalize(f, a, b)
        })
        .collect();
    // The raw grid cells stay in the pool, so polishing can never hurt.
    let mut pool: Vec<(f64, CompatDir<D>)> = polished.into_iter().flatten().collect();
    pool.extend(
        cells
            .iter()
            .filter_map(|&(_, ia, ib)| finalize(f, a_nodes[ia], b_nodes[ib])),
    );
    let best = pool
        .into_iter()
        .reduce(|x, y| if better(&y, &x, scale) { y } else { x })
        .ok_or(Error::DegenerateGrid)?;

    let h = covering_radius(D, opts.grid);
    let denom = std::f64::consts::FRAC_1_SQRT_2 - 2.0 * h;
    let certified_gap = if denom > 0.0 {
        2.0 * spread * 2.0 * h / denom
    } else {
        f64::INFINITY
    };
    Ok(ConeMinResult {
        min_value: best.0,
        argmin: best.1,
        method: SearchMethod::GridPolish,
        grid_resolution: opts.grid,
        certified_gap,
    })
}

fn polish<const D: usize>(
    f: &QuadForm,
    a: &Vector<D>,
    b: &Vector<D>,
    opts: &ConeSearch,
) -> (Vector<D>, Vector<D>) {
    let m = D - 1;
    let split = |x: &[f64]| -> (Vector<D>, Vector<D>) {
        (
            point_from_angles::<D>(&x[..m]),
            point_from_angles::<D>(&x[m..]),
        )
    };
    let objective = |x: &[f64]| {
        let (a, b) = split(x);
        ratio(f, &a, &b).unwrap_or(f64::INFINITY)
    };
    let (aa, ab) = (angles_from_point(a), angles_from_point(b));
    let mut x: Vec<f64> = aa[..m].iter().chain(&ab[..m]).copied().collect();
    let mut step = 2.0 * std::f64::consts::PI / opts.grid as f64;
    for _ in 0..opts.polish_rounds {
        x = nelder_mead(objective, &x, step, opts.polish_iters).x;
        step *= 0.1;
    }
    split(&x)
}

/// Independent route: Riemannian gradient descent with Armijo line search
/// from `restarts` random starting pairs drawn from a seeded generator.
pub fn min_over_compatible_restarts<const D: usize>(
    f: &QuadForm,
    restarts: usize,
    seed: u64,
) -> Result<ConeMinResult<D>> {
    check_dim::<D>(f)?;
    if restarts == 0 {
        return Err(Error::InvalidArgument(
            "restart count must be positive".into(),
        ));
    }
    let scale = f.norm();
    let runs: Vec<Option<(f64, CompatDir<D>)>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let draw = |rng: &mut ChaCha8Rng| -> Vector<D> {
                std::array::from_fn(|_| StandardNormal.sample(rng))
            };
            let a = draw(&mut rng);
            let b = draw(&mut rng);
            let (_, a, b) = gradient_descent(f, a, b, 3000);
            finalize(f, a, b)
        })
        .collect();
    let best = runs
        .into_iter()
        .flatten()
        .reduce(|x, y| if better(&y, &x, scale) { y } else { x })
        .ok_or(Error::DegenerateGrid)?;
    Ok(ConeMinResult {
        min_value: best.0,
        argmin: best.1,
        method: SearchMethod::Restarts,
        grid_resolution: 0,
        certified_gap: f64::INFINITY,
    })
}

/// Compatible minimum of a form of either dimension.
pub fn min_over_compatible_any(f: &QuadForm, opts: &ConeSearch) -> Result<ConeMin> {
    match f.dim() {
        2 => Ok(ConeMin::D2(min_over_compatible::<2>(f, opts)?)),
        _ => Ok(ConeMin::D3(min_over_compatible::<3>(f, opts)?)),
    }
}

/// Rank-one convexity verdict with the search that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOneVerdict {
    pub sr1c: bool,
    pub search: ConeMin,
}

/// A quadratic form is symmetric rank-one convex iff `f(a⊙b) ≥ 0` for all
/// `a`, `b`; decided as `min ≥ -1e-9` on the compatible unit set.
pub fn is_sym_rank_one_convex(f: &QuadForm, opts: &ConeSearch) -> Result<RankOneVerdict> {
    let search = min_over_compatible_any(f, opts)?;
    Ok(RankOneVerdict {
        sr1c: search.min_value() >= -SR1C_TOL,
        search,
    })
}

/// Options for [`compute_eta`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaOptions {
    pub search: ConeSearch,
    pub seed: u64,
    /// Random restarts of the independent cross-check (0 skips it).
    pub restarts: usize,
}

impl Default for EtaOptions {
    fn default() -> Self {
        EtaOptions {
            search: ConeSearch::default(),
            seed: 0,
            restarts: 1000,
        }
    }
}

/// η together with its minimizer and the consistency checks.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaResult {
    pub eta: f64,
    pub argmin: CompatDir<3>,
    pub grid: usize,
    pub certified_gap: f64,
    /// Minimum found by the restart route, when run.
    pub restarts_eta: Option<f64>,
    pub structure: StructureReport,
    /// False when the structure check or the upper bound `η ≤ 1/3` fails.
    pub flagged: bool,
}

/// Minimum of `f0` over the compatible unit set.
pub fn compute_eta(opts: &EtaOptions) -> Result<EtaResult> {
    if opts.search.grid < 16 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution for eta must be at least 16, got {}",
            opts.search.grid
        )));
    }
    let f0 = catalog::f0();
    let main = min_over_compatible::<3>(&f0, &opts.search)?;
    let restarts_eta = if opts.restarts > 0 {
        Some(min_over_compatible_restarts::<3>(&f0, opts.restarts, opts.seed)?.min_value)
    } else {
        None
    };
    let structure = minimizer_structure_check(&main.argmin);
    let eta = main.min_value;
    let flagged = !structure.passed || !(eta > 0.0 && eta <= 1.0 / 3.0 + 1e-9);
    Ok(EtaResult {
        eta,
        argmin: main.argmin,
        grid: opts.search.grid,
        certified_gap: main.certified_gap,
        restarts_eta,
        structure,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadform::QuadForm;
    use crate::tensor::SymMat;

    fn quick() -> ConeSearch {
        ConeSearch::with_grid(32)
    }

    #[test]
    fn norm_sq_minimum_is_one() {
        let r = min_over_compatible::<3>(&QuadForm::norm_sq(3), &quick()).unwrap();
        assert!((r.min_value - 1.0).abs() < 1e-12);
        assert!((r.argmin.odot().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn det_2d_minimum() {
        let f = catalog::det_2d();
        let r = min_over_compatible::<2>(&f, &quick()).unwrap();
        assert!((r.min_value + 0.5).abs() < 1e-12, "{}", r.min_value);
        assert!((f.eval(&r.argmin.odot()) - r.min_value).abs() < 1e-12);
        // The minimizer is orthogonal: a⊙b with a ⊥ b.
        let d = r.argmin;
        assert!(crate::tensor::dot(&d.a, &d.b).abs() < 1e-6);
    }

    #[test]
    fn f0_minimum_within_bounds() {
        let r = min_over_compatible::<3>(&catalog::f0(), &quick()).unwrap();
        assert!(r.min_value > 0.0 && r.min_value <= 1.0 / 3.0 + 1e-9);
        let witness = SymMat::<3>::from_fn(|_, _| 1.0 / 3.0);
        assert!((catalog::f0().eval(&witness) - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.certified_gap > 0.0 && r.certified_gap.is_finite());
    }

    #[test]
    fn verdicts() {
        assert!(
            is_sym_rank_one_convex(&catalog::neg_det_2d(), &quick())
                .unwrap()
                .sr1c
        );
        let v = is_sym_rank_one_convex(&catalog::cof_entry(2, 1.0), &quick()).unwrap();
        assert!(!v.sr1c);
        // The witness a⊙b has a×b along e3.
        if let ConeMin::D3(r) = v.search {
            let x = r.argmin.cross();
            assert!(x[0].abs() < 1e-6 && x[1].abs() < 1e-6 && x[2].abs() > 0.5);
        } else {
            panic!("expected a 3d search");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            min_over_compatible::<2>(&catalog::f0(), &quick()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(min_over_compatible::<3>(&catalog::f0(), &ConeSearch::with_grid(6)).is_err());
        let opts = EtaOptions {
            search: ConeSearch::with_grid(8),
            ..Default::default()
        };
        assert!(compute_eta(&opts).is_err());
    }

    #[test]
    fn scale_invariance() {
        let f = catalog::cof_entry(0, 1.0);
        let r1 = min_over_compatible::<3>(&f, &quick()).unwrap();
        let r2 = min_over_compatible::<3>(&f.scaled(3.0), &quick()).unwrap();
        assert!((3.0 * r1.min_value - r2.min_value).abs() < 1e-10);
    }
}
