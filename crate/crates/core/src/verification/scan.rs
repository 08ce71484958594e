//! Multi-start search for elliptic Lagrangian relative equilibria at fixed masses.
//!
//! The equilateral constraint is eliminated exactly: every equilateral triple
//! on the manifold is an isometry applied to a canonical triangle
//!
//! ```text
//! S³: q_i = (ρ cos θ_i, ρ sin θ_i, √(1−ρ²), 0)
//! H³: q_i = (ρ cos θ_i, ρ sin θ_i, 0, √(1+ρ²))
//! ```
//!
//! with `θ_i = 2πi/3`. The isometry is a product of plane rotations (and
//! boosts on H³). For the rigid `wx`-rotation ansatz the residual
//!
//! ```text
//! −ω² P q_i − [G_i(q) − σ ω² r_i² q_i] = ω² B_i − G_i,   B_i = σ r_i² q_i − P q_i
//! ```
//!
//! is linear in `ω²`, so `ω²` is fixed by nonnegative least squares and the
//! search runs over the remaining seven parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::attraction_terms;
use crate::geometry::{boost, inner, rotate_plane, Curvature, Vec4};
use crate::simplex::{self, SimplexSettings};

use std::f64::consts::PI;

/// Number of search parameters: triangle size plus six isometry coordinates.
pub const SEARCH_DIM: usize = 7;

/// Residual reported for singular candidates.
const SINGULAR_PENALTY: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanSettings {
    pub restarts: usize,
    pub seed: u64,
    /// Smallest canonical triangle radius sampled.
    pub rho_min: f64,
    /// Largest canonical triangle radius on H³ (on S³ the bound is 1).
    pub rho_max_hyperbolic: f64,
    /// Bound on |rapidity| of the boosts placing the triangle in H³.
    pub max_rapidity: f64,
    /// On H³ every body must satisfy `r_i ≤ max_radius_hyperbolic`.
    pub max_radius_hyperbolic: f64,
    /// On H³ every body must satisfy `|y_i| ≤ max_abs_y_hyperbolic`.
    pub max_abs_y_hyperbolic: f64,
    /// When set to δ, candidates must have `r_i ≥ δ` and `|sin a_i| ≥ δ` for
    /// `i = 1, 2` (with `a₀ = 0`). Off by default: the full ansatz is searched.
    pub generic_branch_margin: Option<f64>,
    pub simplex: SimplexSettings,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            restarts: 50,
            seed: 0,
            rho_min: 0.05,
            rho_max_hyperbolic: 2.0,
            max_rapidity: 2.0,
            max_radius_hyperbolic: 2.0,
            max_abs_y_hyperbolic: 1.0,
            generic_branch_margin: None,
            simplex: SimplexSettings {
                initial_step: 1.0,
                max_evals: 6_000,
                ..SimplexSettings::default()
            },
        }
    }
}

/// Best candidate found at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanCandidate {
    pub positions: [Vec4; 3],
    pub omega: f64,
    pub residual: f64,
}

impl ScanCandidate {
    /// Distance of body 0 from the `yz`-plane, `r₀ = √(w₀² + x₀²)`.
    pub fn r0(&self) -> f64 {
        self.positions[0].w.hypot(self.positions[0].x)
    }

    pub fn y0(&self) -> f64 {
        self.positions[0].y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub m1: f64,
    pub m2: f64,
    pub min_residual: f64,
    pub median_residual: f64,
    pub restarts: usize,
    pub evaluations: usize,
    pub best: ScanCandidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassScanResult {
    pub sigma: Curvature,
    pub points: Vec<ScanPoint>,
    pub meta: ScanSettings,
}

impl MassScanResult {
    pub fn point(&self, m1: f64, m2: f64) -> Option<&ScanPoint> {
        self.points
            .iter()
            .find(|p| (p.m1 - m1).abs() < 1e-12 && (p.m2 - m2).abs() < 1e-12)
    }

    pub fn argmin(&self) -> Option<&ScanPoint> {
        self.points
            .iter()
            .min_by(|a, b| a.min_residual.total_cmp(&b.min_residual))
    }
}

/// Upper bound of the canonical radius for `sigma`.
fn rho_max(sigma: Curvature, settings: &ScanSettings) -> f64 {
    match sigma {
        Curvature::Positive => 1.0,
        Curvature::Negative => settings.rho_max_hyperbolic,
    }
}

/// Maps search parameters to an equilateral configuration.
pub fn configuration(sigma: Curvature, params: &[f64], settings: &ScanSettings) -> [Vec4; 3] {
    let rho = params[0].clamp(settings.rho_min, rho_max(sigma, settings));
    let canonical = [0, 1, 2].map(|i| {
        let (s, c) = (2.0 * PI * i as f64 / 3.0).sin_cos();
        match sigma {
            Curvature::Positive => {
                Vec4::new(rho * c, rho * s, (1.0 - rho * rho).max(0.0).sqrt(), 0.0)
            }
            Curvature::Negative => Vec4::new(rho * c, rho * s, 0.0, (1.0 + rho * rho).sqrt()),
        }
    });
    canonical.map(|q| match sigma {
        Curvature::Positive => {
            let q = rotate_plane(q, 0, 1, params[1]);
            let q = rotate_plane(q, 0, 2, params[2]);
            let q = rotate_plane(q, 1, 2, params[3]);
            let q = rotate_plane(q, 0, 3, params[4]);
            let q = rotate_plane(q, 1, 3, params[5]);
            rotate_plane(q, 2, 3, params[6])
        }
        Curvature::Negative => {
            let k = settings.max_rapidity;
            let q = rotate_plane(q, 0, 1, params[1]);
            let q = rotate_plane(q, 0, 2, params[2]);
            let q = rotate_plane(q, 1, 2, params[3]);
            let q = boost(q, 0, params[4].clamp(-k, k));
            let q = boost(q, 1, params[5].clamp(-k, k));
            boost(q, 2, params[6].clamp(-k, k))
        }
    })
}

/// Residual of the rigid `wx`-rotation ansatz at `positions`, with the
/// frequency chosen optimally. Returns `(residual, ω)`.
pub fn rigid_rotation_residual(
    positions: &[Vec4; 3],
    masses: &[f64; 3],
    sigma: Curvature,
) -> (f64, f64) {
    let g = match attraction_terms(positions, masses, sigma) {
        Ok(g) => g,
        Err(_) => return (SINGULAR_PENALTY, 0.0),
    };
    let s = sigma.sigma();
    let b = positions.map(|q| {
        let r2 = q.w * q.w + q.x * q.x;
        q * (s * r2) - Vec4::new(q.w, q.x, 0.0, 0.0)
    });
    let dot = |u: &[Vec4; 3], v: &[Vec4; 3]| -> f64 {
        (0..3).map(|i| inner(u[i], v[i], Curvature::Positive)).sum()
    };
    let bb = dot(&b, &b);
    let lambda = if bb > 0.0 {
        (dot(&b, &g) / bb).max(0.0)
    } else {
        0.0
    };
    let res2: f64 = (0..3)
        .map(|i| {
            let d = b[i] * lambda - g[i];
            inner(d, d, Curvature::Positive)
        })
        .sum();
    (res2.sqrt(), lambda.sqrt())
}

/// How far `positions` lie outside the admissible region; zero when admissible.
pub fn region_violation(sigma: Curvature, positions: &[Vec4; 3], settings: &ScanSettings) -> f64 {
    let mut excess = 0.0;
    if sigma == Curvature::Negative {
        for q in positions {
            excess += (q.w.hypot(q.x) - settings.max_radius_hyperbolic).max(0.0);
            excess += (q.y.abs() - settings.max_abs_y_hyperbolic).max(0.0);
        }
    }
    if let Some(delta) = settings.generic_branch_margin {
        let base = positions[0].x.atan2(positions[0].w);
        for (i, q) in positions.iter().enumerate() {
            let r = q.w.hypot(q.x);
            excess += (delta - r).max(0.0);
            if i > 0 {
                let a = q.x.atan2(q.w) - base;
                excess += (delta - a.sin().abs()).max(0.0);
            }
        }
    }
    excess
}

fn restart_point(sigma: Curvature, settings: &ScanSettings, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = vec![0.0; SEARCH_DIM];
    x[0] = rng.gen_range(settings.rho_min..=rho_max(sigma, settings));
    for v in x.iter_mut().take(4).skip(1) {
        *v = rng.gen_range(-PI..PI);
    }
    for v in x.iter_mut().skip(4) {
        *v = match sigma {
            Curvature::Positive => rng.gen_range(-PI..PI),
            Curvature::Negative => rng.gen_range(-settings.max_rapidity..=settings.max_rapidity),
        };
    }
    x
}

/// Per-point seed; independent of scheduling order.
fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Multi-start minimization of the ansatz residual at masses `(1, m1, m2)`.
pub fn scan_point(
    sigma: Curvature,
    m1: f64,
    m2: f64,
    settings: &ScanSettings,
    seed: u64,
) -> ScanPoint {
    let masses = [1.0, m1, m2];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = vec![0.2, 1.0, 1.0, 1.0, 0.5, 0.5, 0.5];
    let objective = |x: &[f64]| {
        let pos = configuration(sigma, x, settings);
        let excess = region_violation(sigma, &pos, settings);
        if excess > 0.0 {
            return SINGULAR_PENALTY + excess;
        }
        let (res, _) = rigid_rotation_residual(&pos, &masses, sigma);
        res * res
    };

    let mut minima = Vec::with_capacity(settings.restarts);
    let mut best: Option<ScanCandidate> = None;
    let mut evaluations = 0;
    for _ in 0..settings.restarts.max(1) {
        let x0 = loop {
            let x = restart_point(sigma, settings, &mut rng);
            if region_violation(sigma, &configuration(sigma, &x, settings), settings) == 0.0 {
                break x;
            }
        };
        let run = simplex::minimize(objective, &x0, &scale, &settings.simplex);
        evaluations += run.evals;
        let positions = normalize_phase(configuration(sigma, &run.x, settings));
        let (residual, omega) = rigid_rotation_residual(&positions, &masses, sigma);
        minima.push(residual);
        if best.is_none_or(|b| residual < b.residual) {
            best = Some(ScanCandidate {
                positions,
                omega,
                residual,
            });
        }
    }
    minima.sort_by(f64::total_cmp);
    let best = best.expect("at least one restart");
    ScanPoint {
        m1,
        m2,
        min_residual: best.residual,
        median_residual: minima[minima.len() / 2],
        restarts: minima.len(),
        evaluations,
        best,
    }
}

/// Rotates in the `wx`-plane so that body 0 has phase `a₀ = 0`.
fn normalize_phase(positions: [Vec4; 3]) -> [Vec4; 3] {
    let phase = positions[0].x.atan2(positions[0].w);
    positions.map(|q| rotate_plane(q, 0, 1, -phase))
}

/// Scans every `(m1, m2)` pair of the grid with `m₀ = 1`, in parallel.
pub fn mass_scan_elliptic(
    sigma: Curvature,
    grid: &[(f64, f64)],
    settings: &ScanSettings,
) -> MassScanResult {
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(k, &(m1, m2))| scan_point(sigma, m1, m2, settings, point_seed(settings.seed, k)))
        .collect();
    MassScanResult {
        sigma,
        points,
        meta: *settings,
    }
}

/// Cartesian grid `axis × axis` in row-major order (`m1` outer).
pub fn square_grid(axis: &[f64]) -> Vec<(f64, f64)> {
    axis.iter()
        .flat_map(|&a| axis.iter().map(move |&b| (a, b)))
        .collect()
}

/// `steps` evenly spaced values from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![min],
        _ => (0..steps)
            .map(|k| min + (max - min) * k as f64 / (steps - 1) as f64)
            .collect(),
    }
}
