//! Nelder–Mead simplex minimizer with dimension-adaptive coefficients.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexSettings {
    /// Edge length of the initial simplex, relative to each coordinate's scale.
    pub initial_step: f64,
    /// Stop when the spread of function values in the simplex falls below this.
    pub f_tol: f64,
    /// Stop when the simplex diameter falls below this.
    pub x_tol: f64,
    pub max_evals: usize,
    /// Number of times the simplex is rebuilt around the best point after convergence.
    pub rebuilds: usize,
}

impl Default for SimplexSettings {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            f_tol: 1e-30,
            x_tol: 1e-13,
            max_evals: 20_000,
            rebuilds: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Minimizes `f` starting from `x0`. `scale` sets the per-coordinate size of
/// the initial simplex.
pub fn minimize<F>(f: F, x0: &[f64], scale: &[f64], settings: &SimplexSettings) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(n >= 1 && scale.len() == n);
    let mut best = x0.to_vec();
    let mut best_f = f(&best);
    let mut evals = 1;
    let mut converged = false;
    let mut step = settings.initial_step;
    for _ in 0..=settings.rebuilds {
        if evals >= settings.max_evals {
            break;
        }
        let budget = settings.max_evals - evals;
        let run = run_simplex(&f, &best, scale, step, settings, budget);
        evals += run.evals;
        converged = run.converged;
        let improved = run.f < best_f;
        if improved {
            best = run.x;
            best_f = run.f;
        }
        if !improved && converged {
            break;
        }
        step *= 0.1;
    }
    SimplexResult {
        x: best,
        f: best_f,
        evals,
        converged,
    }
}

fn run_simplex<F>(
    f: &F,
    x0: &[f64],
    scale: &[f64],
    step: f64,
    s: &SimplexSettings,
    budget: usize,
) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    // Gao & Han adaptive coefficients
    let (alpha, gamma, rho, shrink) =
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);

    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step * scale[i];
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;
    let mut converged = false;

    let mut order: Vec<usize> = (0..=n).collect();
    while evals < budget {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (lo, hi, nh) = (order[0], order[n], order[n - 1]);

        let f_spread = vals[hi] - vals[lo];
        let diameter = pts
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&pts[lo])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if f_spread <= s.f_tol || diameter <= s.x_tol {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for &k in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&pts[k]) {
                *c += v / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[hi])
                .map(|(c, h)| c + t * (c - h))
                .collect()
        };

        let xr = along(alpha);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[lo] {
            let xe = along(alpha * gamma);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[hi] = xe;
                vals[hi] = fe;
            } else {
                pts[hi] = xr;
                vals[hi] = fr;
            }
            continue;
        }
        if fr < vals[nh] {
            pts[hi] = xr;
            vals[hi] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[hi] {
            let xc = along(alpha * rho);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < vals[hi].min(fr) {
            pts[hi] = xc;
            vals[hi] = fc;
            continue;
        }
        let anchor = pts[lo].clone();
        for &k in &order[1..] {
            for (p, a) in pts[k].iter_mut().zip(&anchor) {
                *p = a + shrink * (*p - a);
            }
            vals[k] = f(&pts[k]);
        }
        evals += n;
    }
    let lo = (0..=n)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .unwrap();
    SimplexResult {
        x: pts[lo].clone(),
        f: vals[lo],
        evals,
        converged,
    }
}
