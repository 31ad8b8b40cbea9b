//! Unit-sphere parameterization, the sphere-pair objective
//! `R(a, b) = f(a⊙b) / |a⊙b|²` and its Riemannian derivatives.

use crate::linalg::solve;
use crate::quadform::QuadForm;
use crate::tensor::{dot, norm, scale, CompatDir, SymMat, Vector};

/// Unit vector from `D - 1` angles: `(cos φ, sin φ)` in 2d and
/// `(sin θ cos φ, sin θ sin φ, cos θ)` in 3d (`angles = [θ, φ]`).
pub(crate) fn point_from_angles<const D: usize>(angles: &[f64]) -> Vector<D> {
    let mut out = [0.0; D];
    let v: &mut [f64] = &mut out;
    match D {
        2 => {
            v[0] = angles[0].cos();
            v[1] = angles[0].sin();
        }
        3 => {
            let (st, ct) = angles[0].sin_cos();
            let (sp, cp) = angles[1].sin_cos();
            v[0] = st * cp;
            v[1] = st * sp;
            v[2] = ct;
        }
        _ => unreachable!("unsupported dimension"),
    }
    out
}

/// Inverse of [`point_from_angles`] for a unit vector.
pub(crate) fn angles_from_point<const D: usize>(p: &Vector<D>) -> [f64; 2] {
    let v: &[f64] = p;
    match D {
        2 => [v[1].atan2(v[0]), 0.0],
        3 => [v[2].clamp(-1.0, 1.0).acos(), v[1].atan2(v[0])],
        _ => unreachable!("unsupported dimension"),
    }
}

/// Angular grid with `n` azimuth steps. In 3d there are `n / 2` polar rings
/// at `θ_i = (i + ½)π / (n/2)`; in 2d the nodes are `φ_j = 2πj / n`. With
/// `hemisphere` set only one representative of each antipodal pair is kept.
pub(crate) fn sphere_grid<const D: usize>(n: usize, hemisphere: bool) -> Vec<Vector<D>> {
    let tau = std::f64::consts::TAU;
    let mut nodes = Vec::new();
    match D {
        2 => {
            let count = if hemisphere { n / 2 } else { n };
            for j in 0..count {
                let angles = [tau * j as f64 / n as f64, 0.0];
                nodes.push(point_from_angles(&angles));
            }
        }
        3 => {
            let rings = n / 2;
            let rings_used = if hemisphere { rings / 2 } else { rings };
            for i in 0..rings_used {
                let theta = (i as f64 + 0.5) * std::f64::consts::PI / rings as f64;
                for j in 0..n {
                    let angles = [theta, tau * j as f64 / n as f64];
                    nodes.push(point_from_angles(&angles));
                }
            }
        }
        _ => unreachable!("unsupported dimension"),
    }
    nodes
}

/// Largest distance from a point of the sphere to the nearest node of
/// [`sphere_grid`] (up to antipodes when `hemisphere` is set).
pub(crate) fn covering_radius(d: usize, n: usize) -> f64 {
    let pi = std::f64::consts::PI;
    match d {
        2 => pi / n as f64,
        _ => std::f64::consts::SQRT_2 * pi / n as f64,
    }
}

/// Rows of the linear map `b ↦ embed(a⊙b)`.
fn odot_rows<const D: usize>(a: &Vector<D>) -> Vec<Vector<D>> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    crate::tensor::embedding_pairs(D)
        .iter()
        .map(|&(i, j)| {
            let mut row = [0.0; D];
            if i == j {
                row[i] = a[i];
            } else {
                row[j] += r * a[i];
                row[i] += r * a[j];
            }
            row
        })
        .collect()
}

/// For fixed `a`, `f(a⊙b) = bᵀ P b` and `|a⊙b|² = bᵀ N b`.
pub(crate) struct Pencil<const D: usize> {
    pub p: [[f64; D]; D],
    pub n: [[f64; D]; D],
}

impl<const D: usize> Pencil<D> {
    pub fn new(q: &QuadForm, a: &Vector<D>) -> Self {
        let rows = odot_rows(a);
        let k = rows.len();
        let mut p = [[0.0; D]; D];
        for r in 0..k {
            for s in 0..k {
                let c = q.coeff(r, s);
                if c == 0.0 {
                    continue;
                }
                for i in 0..D {
                    for j in 0..D {
                        p[i][j] += rows[r][i] * c * rows[s][j];
                    }
                }
            }
        }
        let aa = dot(a, a);
        let mut n = [[0.0; D]; D];
        for i in 0..D {
            for j in 0..D {
                n[i][j] = 0.5 * (a[i] * a[j] + if i == j { aa } else { 0.0 });
            }
        }
        Pencil { p, n }
    }

    pub fn quad(m: &[[f64; D]; D], b: &Vector<D>) -> f64 {
        let mut s = 0.0;
        for i in 0..D {
            s += b[i] * dot(&m[i], b);
        }
        s
    }
}

/// `f(a⊙b) / |a⊙b|²`, or `None` when `|a⊙b| ≤ 1e-8`.
pub(crate) fn ratio<const D: usize>(q: &QuadForm, a: &Vector<D>, b: &Vector<D>) -> Option<f64> {
    let s = SymMat::odot(a, b);
    let mut x = [0.0; 6];
    s.embed_into(&mut x);
    let x = &x[..SymMat::<D>::LEN];
    let n2: f64 = x.iter().map(|v| v * v).sum();
    (n2 > 1e-16).then(|| q.eval_embedded(x) / n2)
}

fn unit<const D: usize>(v: &Vector<D>) -> Vector<D> {
    scale(v, 1.0 / norm(v))
}

/// Orthonormal basis of the tangent space at the unit vector `p`.
pub(crate) fn tangent_basis<const D: usize>(p: &Vector<D>) -> Vec<Vector<D>> {
    if D == 2 {
        let mut t = [0.0; D];
        let (ts, ps): (&mut [f64], &[f64]) = (&mut t, p);
        ts[0] = -ps[1];
        ts[1] = ps[0];
        return vec![t];
    }
    let k = (0..D)
        .min_by(|&i, &j| p[i].abs().total_cmp(&p[j].abs()))
        .unwrap();
    let mut e = [0.0; D];
    e[k] = 1.0;
    let u1 = unit(&sub(&e, &scale(p, dot(&e, p))));
    let (ps, us): (&[f64], &[f64]) = (p, &u1);
    let mut u2 = [0.0; D];
    {
        let w: &mut [f64] = &mut u2;
        w[0] = ps[1] * us[2] - ps[2] * us[1];
        w[1] = ps[2] * us[0] - ps[0] * us[2];
        w[2] = ps[0] * us[1] - ps[1] * us[0];
    }
    vec![u1, u2]
}

fn sub<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> Vector<D> {
    let mut out = *a;
    for i in 0..D {
        out[i] -= b[i];
    }
    out
}

fn axpy<const D: usize>(a: &Vector<D>, s: f64, x: &Vector<D>) -> Vector<D> {
    let mut out = *a;
    for i in 0..D {
        out[i] += s * x[i];
    }
    out
}

/// Euclidean gradients `(∂R/∂a, ∂R/∂b)` of the ratio at unnormalized `(a, b)`.
pub(crate) fn ratio_gradient<const D: usize>(
    q: &QuadForm,
    a: &Vector<D>,
    b: &Vector<D>,
) -> (f64, Vector<D>, Vector<D>) {
    let s = SymMat::odot(a, b);
    let k = SymMat::<D>::LEN;
    let mut x = [0.0; 6];
    s.embed_into(&mut x);
    let x = &x[..k];
    let n2: f64 = x.iter().map(|v| v * v).sum();
    let r = q.eval_embedded(x) / n2;
    let g: Vec<f64> = (0..k)
        .map(|i| {
            let qx: f64 = (0..k).map(|j| q.coeff(i, j) * x[j]).sum();
            2.0 * (qx - r * x[i]) / n2
        })
        .collect();
    let gm = SymMat::<D>::from_embedded(&g);
    (r, gm.apply(b), gm.apply(a))
}

/// Sphere-pair point written in tangent coordinates around `(a0, b0)`.
struct Chart<const D: usize> {
    a0: Vector<D>,
    b0: Vector<D>,
    ua: Vec<Vector<D>>,
    ub: Vec<Vector<D>>,
}

impl<const D: usize> Chart<D> {
    fn new(a0: Vector<D>, b0: Vector<D>) -> Self {
        Chart {
            ua: tangent_basis(&a0),
            ub: tangent_basis(&b0),
            a0,
            b0,
        }
    }

    fn dim(&self) -> usize {
        self.ua.len() + self.ub.len()
    }

    fn raw(&self, z: &[f64]) -> (Vector<D>, Vector<D>) {
        let m = self.ua.len();
        let mut a = self.a0;
        let mut b = self.b0;
        for (i, u) in self.ua.iter().enumerate() {
            a = axpy(&a, z[i], u);
        }
        for (i, u) in self.ub.iter().enumerate() {
            b = axpy(&b, z[m + i], u);
        }
        (a, b)
    }

    fn point(&self, z: &[f64]) -> (Vector<D>, Vector<D>) {
        let (a, b) = self.raw(z);
        (unit(&a), unit(&b))
    }

    /// Value and exact gradient in chart coordinates.
    fn gradient(&self, q: &QuadForm, z: &[f64]) -> (f64, Vec<f64>) {
        let (va, vb) = self.raw(z);
        let (na, nb) = (norm(&va), norm(&vb));
        let (a, b) = (scale(&va, 1.0 / na), scale(&vb, 1.0 / nb));
        let (r, ga, gb) = ratio_gradient(q, &a, &b);
        // Chain rule through the normalization v ↦ v/|v|.
        let pa = scale(&sub(&ga, &scale(&a, dot(&ga, &a))), 1.0 / na);
        let pb = scale(&sub(&gb, &scale(&b, dot(&gb, &b))), 1.0 / nb);
        let mut g: Vec<f64> = self.ua.iter().map(|u| dot(u, &pa)).collect();
        g.extend(self.ub.iter().map(|u| dot(u, &pb)));
        (r, g)
    }
}

/// Riemannian Newton refinement of a sphere-pair minimizer of the ratio.
/// The gradient is exact; the Hessian is a central difference of the
/// gradient with step `1e-5`. Steps are only taken when they do not raise the
/// value and reduce the gradient.
pub(crate) fn newton_refine<const D: usize>(
    q: &QuadForm,
    a: Vector<D>,
    b: Vector<D>,
    max_iter: usize,
) -> (Vector<D>, Vector<D>) {
    let h = 1e-5;
    let (mut a, mut b) = (unit(&a), unit(&b));
    for _ in 0..max_iter {
        let chart = Chart::new(a, b);
        let m = chart.dim();
        let zero = vec![0.0; m];
        let (r0, g0) = chart.gradient(q, &zero);
        let gnorm = g0.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm == 0.0 {
            break;
        }
        let mut hess = vec![0.0; m * m];
        for k in 0..m {
            let mut zp = zero.clone();
            let mut zm = zero.clone();
            zp[k] = h;
            zm[k] = -h;
            let (_, gp) = chart.gradient(q, &zp);
            let (_, gm) = chart.gradient(q, &zm);
            for i in 0..m {
                hess[i * m + k] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        for i in 0..m {
            for k in (i + 1)..m {
                let s = 0.5 * (hess[i * m + k] + hess[k * m + i]);
                hess[i * m + k] = s;
                hess[k * m + i] = s;
            }
        }
        let rhs: Vec<f64> = g0.iter().map(|v| -v).collect();
        let Some(step) = solve(&hess, &rhs, m) else {
            break;
        };
        let (na, nb) = chart.point(&step);
        let (r1, g1) = Chart::new(na, nb).gradient(q, &zero);
        let g1norm = g1.iter().map(|v| v * v).sum::<f64>().sqrt();
        let slack = 4.0 * f64::EPSILON * r0.abs().max(1.0);
        if !(r1 <= r0 + slack && g1norm < gnorm) {
            break;
        }
        a = na;
        b = nb;
        let snorm = step.iter().map(|v| v * v).sum::<f64>().sqrt();
        if snorm < 1e-15 {
            break;
        }
    }
    (a, b)
}

/// Riemannian gradient descent with Armijo backtracking from `(a, b)`.
pub(crate) fn gradient_descent<const D: usize>(
    q: &QuadForm,
    a: Vector<D>,
    b: Vector<D>,
    max_iter: usize,
) -> (f64, Vector<D>, Vector<D>) {
    let (mut a, mut b) = (unit(&a), unit(&b));
    let zero = vec![0.0; 2 * (D - 1)];
    let mut step = 1.0;
    let mut chart = Chart::new(a, b);
    let (mut r, mut g) = chart.gradient(q, &zero);
    for _ in 0..max_iter {
        let gg: f64 = g.iter().map(|v| v * v).sum();
        if gg.sqrt() < 1e-13 {
            break;
        }
        let mut accepted = false;
        step *= 2.0;
        for _ in 0..60 {
            let z: Vec<f64> = g.iter().map(|v| -step * v).collect();
            let (na, nb) = chart.point(&z);
            if let Some(rn) = ratio(q, &na, &nb) {
                if rn <= r - 0.4 * step * gg {
                    a = na;
                    b = nb;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        chart = Chart::new(a, b);
        (r, g) = chart.gradient(q, &zero);
    }
    (r, a, b)
}

/// Normalizes `(a, b)` to `|a⊙b| = 1` and fixes the sign so that the first
/// non-negligible entry of `a` is positive.
pub(crate) fn canonical<const D: usize>(a: Vector<D>, b: Vector<D>) -> Option<CompatDir<D>> {
    let dir = CompatDir::new(a, b).normalized()?;
    let lead = dir
        .a
        .iter()
        .copied()
        .find(|v| v.abs() > 1e-12)
        .unwrap_or(0.0);
    Some(if lead < 0.0 {
        CompatDir::new(scale(&dir.a, -1.0), scale(&dir.b, -1.0))
    } else {
        dir
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadform::catalog;

    #[test]
    fn angles_round_trip() {
        for &ang in &[[0.3, 1.2], [2.0, -2.5], [1.0, 0.0]] {
            let p = point_from_angles::<3>(&ang);
            assert!((norm(&p) - 1.0).abs() < 1e-15);
            let back = angles_from_point(&p);
            assert!((back[0] - ang[0]).abs() < 1e-14);
            assert!((back[1] - ang[1]).abs() < 1e-14);
        }
        let p = point_from_angles::<2>(&[0.7]);
        assert!((angles_from_point(&p)[0] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn grid_sizes_and_covering() {
        assert_eq!(sphere_grid::<3>(16, false).len(), 128);
        assert_eq!(sphere_grid::<3>(16, true).len(), 64);
        assert_eq!(sphere_grid::<2>(16, true).len(), 8);
        // Random points lie within the covering radius of some node.
        let n = 16;
        let nodes = sphere_grid::<3>(n, false);
        let h = covering_radius(3, n);
        for k in 0..200 {
            let t = 0.1 + k as f64 * 0.37;
            let p = point_from_angles::<3>(&[(t * 1.3).rem_euclid(std::f64::consts::PI), t]);
            let best = nodes
                .iter()
                .map(|nd| norm(&sub(nd, &p)))
                .fold(f64::INFINITY, f64::min);
            assert!(best <= h + 1e-12);
        }
    }

    #[test]
    fn pencil_matches_ratio() {
        let q = catalog::f0();
        let a = unit(&[0.3, -0.2, 0.9]);
        let b = unit(&[0.5, 0.5, -0.1]);
        let pen = Pencil::new(&q, &a);
        let r = Pencil::quad(&pen.p, &b) / Pencil::quad(&pen.n, &b);
        assert!((r - ratio(&q, &a, &b).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let q = catalog::f0();
        let chart = Chart::new(unit(&[0.3, -0.2, 0.9]), unit(&[0.5, 0.5, -0.1]));
        let z = [0.01, -0.02, 0.03, 0.005];
        let (_, g) = chart.gradient(&q, &z);
        for k in 0..4 {
            let mut zp = z;
            let mut zm = z;
            zp[k] += 1e-6;
            zm[k] -= 1e-6;
            let (ap, bp) = chart.point(&zp);
            let (am, bm) = chart.point(&zm);
            let fd = (ratio(&q, &ap, &bp).unwrap() - ratio(&q, &am, &bm).unwrap()) / 2e-6;
            assert!((fd - g[k]).abs() < 1e-8, "{k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn descent_then_newton_reaches_stationarity() {
        let q = catalog::det_2d();
        let (r, a, b) = gradient_descent(&q, [1.0, 0.2], [0.1, 1.0], 500);
        assert!((r + 0.5).abs() < 1e-10, "{r}");
        let (a, b) = newton_refine(&q, a, b, 10);
        assert!((ratio(&q, &a, &b).unwrap() + 0.5).abs() < 1e-14);
    }
}
