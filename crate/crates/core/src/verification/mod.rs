//! Numerical checks of the conservation laws and of the equal-mass property of
//! Lagrangian relative equilibria.

pub mod scan;

use serde::{Deserialize, Serialize};

use crate::dynamics::angular_momentum;
use crate::integrator::Trajectory;

pub use scan::{mass_scan_elliptic, MassScanResult, ScanCandidate, ScanPoint, ScanSettings};

/// Largest `|c_wy|` and `|c_wz|` seen along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub max_abs_c_wy: f64,
    pub max_abs_c_wz: f64,
    pub samples: usize,
}

/// Evaluates `c_wy` and `c_wz` at every sample of `traj`. Both vanish along an
/// elliptic Lagrangian relative equilibrium.
pub fn verify_lemma1(traj: &Trajectory) -> LemmaReport {
    let mut report = LemmaReport {
        max_abs_c_wy: 0.0,
        max_abs_c_wz: 0.0,
        samples: traj.samples.len(),
    };
    for state in &traj.samples {
        let c = angular_momentum(state);
        report.max_abs_c_wy = report.max_abs_c_wy.max(c[1].abs());
        report.max_abs_c_wz = report.max_abs_c_wz.max(c[2].abs());
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassEqualityWitness {
    /// `|(m₁ − m₂)(1 − A)|`
    pub witness: f64,
    /// `(m₀A + m₁ + m₂A, m₀A + m₂ + m₁A)`
    pub brackets: (f64, f64),
}

/// For nonzero `r_i sin a_i`, the `i = 1, 2` elliptic-elliptic equations force
/// both brackets to vanish; their difference is `(m₁ − m₂)(1 − A)`, so they can
/// only vanish together when `m₁ = m₂` (given `A < 1`).
pub fn mass_equality_witness(a: f64, masses: [f64; 3]) -> MassEqualityWitness {
    let [m0, m1, m2] = masses;
    let b1 = m0 * a + m1 + m2 * a;
    let b2 = m0 * a + m2 + m1 * a;
    MassEqualityWitness {
        witness: (b1 - b2).abs(),
        brackets: (b1, b2),
    }
}

/// Treats the pair
///
/// ```text
/// m₀A + m₁ + m₂A = ρ₁² (α² − β²)(1 − A²)^{3/2}
/// m₀A + m₁ + m₂A = r₁² (β² − α²)(1 − A²)^{3/2}
/// ```
///
/// as exact equations at common mass `m` and solves it for `α² − β²` by
/// subtracting one from the other. Returns the implied `|α² − β²|`, which is
/// zero whenever `A² < 1` and `r₁² + ρ₁² > 0`.
pub fn verify_ee_frequency_forcing(m: f64, a: f64, r1: f64, rho1: f64) -> f64 {
    let bracket = m * a + m + m * a;
    let scale = (1.0 - a * a).powf(1.5);
    // (ρ₁² + r₁²)(α² − β²) scale = bracket − bracket
    let lhs_first = bracket;
    let lhs_second = bracket;
    ((lhs_first - lhs_second) / ((rho1 * rho1 + r1 * r1) * scale)).abs()
}
