//! Convex envelopes of gridded functions by discrete Legendre–Fenchel
//! transforms, one axis at a time.

use serde::Serialize;

use crate::{Error, Result};

/// A uniform grid axis `start + i·step`, `i < len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    /// `len` equispaced nodes from `lo` to `hi` inclusive.
    pub fn new(lo: f64, hi: f64, len: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::NonFinite("axis bounds"));
        }
        if !(lo < hi) {
            return Err(Error::InvalidArgument(format!(
                "axis needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        if len < 2 {
            return Err(Error::InvalidArgument(format!(
                "axis needs at least 2 nodes, got {len}"
            )));
        }
        Ok(Axis {
            start: lo,
            step: (hi - lo) / (len - 1) as f64,
            len,
        })
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.node(i)).collect()
    }

    pub fn end(&self) -> f64 {
        self.node(self.len - 1)
    }
}

/// Values on a rectangular grid of one to three axes, stored row-major
/// (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    axes: Vec<Axis>,
    values: Vec<f64>,
}

fn shape_len(axes: &[Axis]) -> usize {
    axes.iter().map(|a| a.len).product()
}

impl GridFn {
    pub fn new(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::InvalidArgument(format!(
                "grid functions have 1 to 3 axes, got {}",
                axes.len()
            )));
        }
        if values.len() != shape_len(&axes) {
            return Err(Error::InvalidArgument(format!(
                "grid has {} nodes but {} values were given",
                shape_len(&axes),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid values"));
        }
        Ok(GridFn { axes, values })
    }

    pub fn sample(axes: Vec<Axis>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let n = shape_len(&axes);
        let mut values = Vec::with_capacity(n);
        let mut p = vec![0.0; axes.len()];
        for idx in 0..n {
            unravel(&axes, idx, &mut p);
            values.push(f(&p));
        }
        GridFn::new(axes, values)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coordinates of the node with flat index `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.axes.len()];
        unravel(&self.axes, idx, &mut p);
        p
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (i, a)| acc * a.len + i)
    }

    /// `max |value|`, at least 1.
    pub fn scale(&self) -> f64 {
        self.values.iter().fold(1.0, |m, v| m.max(v.abs()))
    }

    /// Largest forward-difference slope magnitude along `axis`.
    pub fn max_slope(&self, axis: usize) -> f64 {
        let shape: Vec<usize> = self.axes.iter().map(|a| a.len).collect();
        let inner: usize = shape[axis + 1..].iter().product();
        let n = shape[axis];
        let step = self.axes[axis].step;
        let mut best = 0.0f64;
        for (idx, v) in self.values.iter().enumerate() {
            if (idx / inner) % n + 1 < n {
                best = best.max((self.values[idx + inner] - v).abs() / step);
            }
        }
        best
    }
}

fn unravel(axes: &[Axis], mut idx: usize, out: &mut [f64]) {
    for (k, a) in axes.iter().enumerate().rev() {
        out[k] = a.node(idx % a.len);
        idx /= a.len;
    }
}

/// Indices of the lower convex hull of `(xs[i], vs[i])`, `xs` ascending.
fn lower_hull(xs: &[f64], vs: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let (p, q) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop q when it lies on or above the chord p–i.
            let cross = (xs[q] - xs[p]) * (vs[i] - vs[p]) - (vs[q] - vs[p]) * (xs[i] - xs[p]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// `out[j] = max_i (slopes[j]·xs[i] - vs[i])` for ascending `xs` and
/// `slopes`, by walking the lower hull once.
fn conjugate_into(xs: &[f64], vs: &[f64], slopes: &[f64], out: &mut [f64]) {
    let hull = lower_hull(xs, vs);
    let mut p = 0;
    for (o, &s) in out.iter_mut().zip(slopes) {
        while p + 1 < hull.len() {
            let (i, k) = (hull[p], hull[p + 1]);
            if (vs[k] - vs[i]) <= s * (xs[k] - xs[i]) {
                p += 1;
            } else {
                break;
            }
        }
        let i = hull[p];
        *o = s * xs[i] - vs[i];
    }
}

/// Discrete Legendre–Fenchel transform of samples on `axis`, evaluated at
/// ascending `slopes`.
pub fn legendre_1d(values: &[f64], axis: &Axis, slopes: &[f64]) -> Result<Vec<f64>> {
    if values.len() != axis.len {
        return Err(Error::InvalidArgument(format!(
            "axis has {} nodes but {} values were given",
            axis.len,
            values.len()
        )));
    }
    if values.iter().chain(slopes).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("legendre input"));
    }
    if slopes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("slopes must be ascending".into()));
    }
    let mut out = vec![0.0; slopes.len()];
    conjugate_into(&axis.nodes(), values, slopes, &mut out);
    Ok(out)
}

/// `out(.., t_j, ..) = max_i (t_j·x_i + data(.., x_i, ..))` along axis `k`.
fn sup_transform(data: &[f64], shape: &[usize], k: usize, from: &[f64], to: &[f64]) -> Vec<f64> {
    let outer: usize = shape[..k].iter().product();
    let inner: usize = shape[k + 1..].iter().product();
    let (n, m) = (from.len(), to.len());
    let mut out = vec![0.0; outer * m * inner];
    let mut line = vec![0.0; n];
    let mut res = vec![0.0; m];
    for o in 0..outer {
        for r in 0..inner {
            for (i, l) in line.iter_mut().enumerate() {
                *l = -data[(o * n + i) * inner + r];
            }
            conjugate_into(from, &line, to, &mut res);
            for (j, v) in res.iter().enumerate() {
                out[(o * m + j) * inner + r] = *v;
            }
        }
    }
    out
}

/// Options of [`convex_envelope`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnvelopeOptions {
    /// Half-width of the dual slope range on every axis. Defaults to twice
    /// the largest finite-difference slope along that axis.
    pub padding_slope: Option<f64>,
    /// Dual nodes per axis. Defaults to `2n - 1`.
    pub dual_points: Option<usize>,
}

fn dual_nodes(g: &GridFn, k: usize, opts: &EnvelopeOptions) -> Result<Vec<f64>> {
    let n = g.axes[k].len;
    let m = opts.dual_points.unwrap_or(2 * n - 1);
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "dual_points must be at least 2, got {m}"
        )));
    }
    let s = match opts.padding_slope {
        Some(s) if !(s.is_finite() && s > 0.0) => {
            return Err(Error::InvalidArgument(format!(
                "padding_slope must be positive, got {s}"
            )))
        }
        Some(s) => s,
        None => (2.0 * g.max_slope(k)).max(f64::MIN_POSITIVE),
    };
    Ok((0..m)
        .map(|j| -s + 2.0 * s * j as f64 / (m - 1) as f64)
        .collect())
}

/// Largest convex minorant on the grid whose slopes lie in the dual box:
/// the biconjugate computed as separable sup-transforms forward to the
/// dual grid and back. Restricting slopes amounts to extending the data
/// linearly beyond the box with the padding slope.
pub fn convex_envelope(g: &GridFn, opts: &EnvelopeOptions) -> Result<GridFn> {
    let d = g.axes.len();
    let primal: Vec<Vec<f64>> = g.axes.iter().map(Axis::nodes).collect();
    let dual: Vec<Vec<f64>> = (0..d)
        .map(|k| dual_nodes(g, k, opts))
        .collect::<Result<_>>()?;

    let mut shape: Vec<usize> = g.axes.iter().map(|a| a.len).collect();
    let mut u: Vec<f64> = g.values.iter().map(|v| -v).collect();
    for k in 0..d {
        u = sup_transform(&u, &shape, k, &primal[k], &dual[k]);
        shape[k] = dual[k].len();
    }
    // u is now the conjugate on the dual grid.
    for v in u.iter_mut() {
        *v = -*v;
    }
    for k in 0..d {
        u = sup_transform(&u, &shape, k, &dual[k], &primal[k]);
        shape[k] = primal[k].len();
    }
    for (e, v) in u.iter_mut().zip(&g.values) {
        *e = e.min(*v);
    }
    GridFn::new(g.axes.clone(), u)
}
