//! Derivative-free local minimization (Nelder–Mead).

/// Result of a Nelder–Mead run.
#[derive(Debug, Clone)]
pub struct Simplex {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of edge
/// `step`, for at most `max_iter` iterations. Uses the standard coefficients
/// (reflection 1, expansion 2, contraction ½, shrink ½).
pub fn nelder_mead<F>(f: F, x0: &[f64], step: f64, max_iter: usize) -> Simplex
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();

    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        // Stable sort keeps ties in insertion order, so runs are reproducible.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        if vals[n] - vals[0] <= 1e-16 * vals[0].abs().max(1e-300) {
            let spread = pts[1..]
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(&pts[0])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if spread < 1e-14 {
                break;
            }
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| pts[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(2.0);
            let fe = f(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        // Shrink towards the best vertex.
        for i in 1..=n {
            let p: Vec<f64> = pts[i]
                .iter()
                .zip(&pts[0])
                .map(|(x, b)| b + 0.5 * (x - b))
                .collect();
            vals[i] = f(&p);
            pts[i] = p;
        }
    }

    let best = (0..=n)
        .min_by(|&i, &j| vals[i].total_cmp(&vals[j]))
        .unwrap();
    Simplex {
        x: pts[best].clone(),
        value: vals[best],
        iterations,
    }
}
