//! Log-barrier Newton method for `max t` subject to
//! `Q + C(A) - t I ⪰ 0` and `A ⪰ 0`.

use crate::linalg::{cholesky, cholesky_inverse, cholesky_logdet, solve};
use crate::quadform::cof_translator_matrix;
use crate::tensor::SymMat;

const NA: usize = 6;
const NV: usize = NA + 1;

/// `E_p` in the order `A11, A22, A33, A12, A13, A23`; off-diagonal basis
/// matrices carry ones in both symmetric positions.
fn basis(p: usize) -> SymMat<3> {
    const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
    let (i, j) = PAIRS[p];
    SymMat::from_fn(|r, c| if (r, c) == (i, j) { 1.0 } else { 0.0 })
}

fn params_to_a(y: &[f64]) -> SymMat<3> {
    (0..NA).fold(SymMat::zeros(), |acc, p| acc + basis(p) * y[p])
}

fn a_to_params(a: &SymMat<3>) -> Vec<f64> {
    vec![
        a.get(0, 0),
        a.get(1, 1),
        a.get(2, 2),
        a.get(0, 1),
        a.get(0, 2),
        a.get(1, 2),
    ]
}

fn flat3(a: &SymMat<3>) -> Vec<f64> {
    a.as_array().iter().flatten().copied().collect()
}

fn matmul(x: &[f64], y: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let xik = x[i * n + k];
            if xik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += xik * y[k * n + j];
            }
        }
    }
    out
}

/// `tr(X Y)` for square `n × n` matrices.
fn trace_prod(x: &[f64], y: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..n {
            s += x[i * n + k] * y[k * n + i];
        }
    }
    s
}

struct Problem {
    q: Vec<f64>,
    /// `C(E_p)` for each parameter.
    cp: Vec<Vec<f64>>,
    /// `E_p` as flat 3×3.
    ep: Vec<Vec<f64>>,
}

struct Eval {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

impl Problem {
    fn new(q: &[f64]) -> Self {
        Problem {
            q: q.to_vec(),
            cp: (0..NA).map(|p| cof_translator_matrix(&basis(p))).collect(),
            ep: (0..NA).map(|p| flat3(&basis(p))).collect(),
        }
    }

    fn slack(&self, y: &[f64]) -> Vec<f64> {
        let mut m = self.q.clone();
        for (p, cp) in self.cp.iter().enumerate() {
            for (mi, ci) in m.iter_mut().zip(cp) {
                *mi += y[p] * ci;
            }
        }
        for i in 0..6 {
            m[i * 6 + i] -= y[NA];
        }
        m
    }

    /// Barrier objective `-s t - logdet M - logdet A`, `None` if infeasible.
    fn value(&self, y: &[f64], s: f64) -> Option<f64> {
        let lm = cholesky(&self.slack(y), 6)?;
        let la = cholesky(&flat3(&params_to_a(y)), 3)?;
        Some(-s * y[NA] - cholesky_logdet(&lm, 6) - cholesky_logdet(&la, 3))
    }

    fn eval(&self, y: &[f64], s: f64) -> Option<Eval> {
        let lm = cholesky(&self.slack(y), 6)?;
        let la = cholesky(&flat3(&params_to_a(y)), 3)?;
        let value = -s * y[NA] - cholesky_logdet(&lm, 6) - cholesky_logdet(&la, 3);
        let minv = cholesky_inverse(&lm, 6);
        let ainv = cholesky_inverse(&la, 3);

        // Derivatives of M along each variable: C(E_p), and -I for t.
        let mut km: Vec<Vec<f64>> = self.cp.iter().map(|cp| matmul(&minv, cp, 6)).collect();
        km.push(minv.iter().map(|v| -v).collect());
        let ka: Vec<Vec<f64>> = self.ep.iter().map(|e| matmul(&ainv, e, 3)).collect();

        let mut grad = vec![0.0; NV];
        for p in 0..NV {
            let tm: f64 = (0..6).map(|i| km[p][i * 6 + i]).sum();
            grad[p] = -tm;
            if p < NA {
                grad[p] -= (0..3).map(|i| ka[p][i * 3 + i]).sum::<f64>();
            }
        }
        grad[NA] -= s;

        let mut hess = vec![0.0; NV * NV];
        for p in 0..NV {
            for r in p..NV {
                let mut h = trace_prod(&km[p], &km[r], 6);
                if p < NA && r < NA {
                    h += trace_prod(&ka[p], &ka[r], 3);
                }
                hess[p * NV + r] = h;
                hess[r * NV + p] = h;
            }
        }
        Some(Eval { value, grad, hess })
    }
}

/// Follows the central path from a strictly feasible start derived from
/// `a_start`. Returns the final `A` (positive definite).
pub(crate) fn barrier_maximize(q: &[f64], a_start: &SymMat<3>, q_norm: f64) -> Option<SymMat<3>> {
    let prob = Problem::new(q);
    let scale = q_norm.max(1.0);
    let shift = 1e-3 * scale.max(a_start.norm());
    let a0 = *a_start + SymMat::identity() * shift;
    let mut y = a_to_params(&a0);
    y.push(0.0);
    let lmin = crate::tensor::min_eigenvalue(6, &prob.slack(&y)).ok()?;
    y[NA] = lmin - 1e-2 * scale;

    let mut s = 10.0 / scale;
    // Duality gap of the barrier is (6 + 3)/s.
    while 9.0 / s > 1e-11 * scale {
        for _ in 0..60 {
            let ev = prob.eval(&y, s)?;
            let step: Vec<f64> = solve(
                &ev.hess,
                &ev.grad.iter().map(|g| -g).collect::<Vec<_>>(),
                NV,
            )?;
            let decrement: f64 = -ev.grad.iter().zip(&step).map(|(g, d)| g * d).sum::<f64>();
            if decrement < 1e-14 {
                break;
            }
            let mut alpha = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let trial: Vec<f64> = y.iter().zip(&step).map(|(v, d)| v + alpha * d).collect();
                if let Some(val) = prob.value(&trial, s) {
                    if val <= ev.value - 0.25 * alpha * decrement {
                        y = trial;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved || decrement < 1e-12 {
                break;
            }
        }
        s *= 10.0;
    }
    Some(params_to_a(&y))
}
