//! Closed-form Lagrangian relative equilibria and the residuals of their
//! defining equations.
//!
//! Two families are constructed:
//!
//! * elliptic: the equilateral triangle rotates in the `wx`-plane with
//!   frequency ω while `y` and `z` stay fixed (S³ and H³);
//! * elliptic-elliptic: simultaneous rotations in the `wx`- and `yz`-planes
//!   with frequencies α and β (S³ only), generated from a great-circle fixed
//!   point with `|α| = |β|`.
//!
//! Substituting the elliptic ansatz into the equations of motion gives
//! `ω² = 3m / |1 − A²|^{3/2}` with `A = σ − 3r²/2`. [`ode_residual`] checks this
//! directly against the vector field.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{acceleration_of, DynamicsError, State};
use crate::geometry::{Curvature, Vec4};

/// Maximum spread of the pairwise couplings accepted as equilateral.
pub const EQUILATERAL_TOL: f64 = 1e-9;

/// Phases `0, 2π/3, 4π/3` of an equilateral triangle with `a₀ = 0`.
pub const TRIANGLE_PHASES: [f64; 3] = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error("invalid radius: {0}")]
    InvalidRadius(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pair ({i}, {j}) has coupling {coupling} with |coupling| >= 1")]
    SingularPair { i: usize, j: usize, coupling: f64 },
    #[error(
        "candidate is not equilateral: coupling spread {spread:e} exceeds {EQUILATERAL_TOL:e}"
    )]
    NotEquilateral { spread: f64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Parameters of an equal-mass elliptic Lagrangian relative equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticREParams {
    pub sigma: Curvature,
    pub m: f64,
    pub r: f64,
    pub y: f64,
    pub z: f64,
    pub omega: f64,
    pub phases: [f64; 3],
}

impl EllipticREParams {
    /// Common off-diagonal inner product `A = σ − 3r²/2`.
    pub fn shape_constant(&self) -> f64 {
        self.sigma.sigma() - 1.5 * self.r * self.r
    }

    /// Positions and velocities of the closed-form orbit at time `t`.
    pub fn orbit_at(&self, t: f64) -> ([Vec4; 3], [Vec4; 3]) {
        let mut pos = [Vec4::ZERO; 3];
        let mut vel = [Vec4::ZERO; 3];
        for i in 0..3 {
            let (s, c) = (self.omega * t + self.phases[i]).sin_cos();
            pos[i] = Vec4::new(self.r * c, self.r * s, self.y, self.z);
            vel[i] = Vec4::new(-self.omega * self.r * s, self.omega * self.r * c, 0.0, 0.0);
        }
        (pos, vel)
    }

    /// Exact second derivative of the closed form, `−ω²(w, x, 0, 0)`.
    pub fn acceleration_at(&self, t: f64) -> [Vec4; 3] {
        let (pos, _) = self.orbit_at(t);
        let w2 = self.omega * self.omega;
        pos.map(|q| Vec4::new(-w2 * q.w, -w2 * q.x, 0.0, 0.0))
    }

    pub fn state_at(&self, t: f64) -> State {
        let (positions, velocities) = self.orbit_at(t);
        State {
            sigma: self.sigma,
            masses: [self.m; 3],
            positions,
            velocities,
            time: t,
        }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega.abs()
    }
}

/// Evaluates the elliptic closed form at `t`.
pub fn elliptic_orbit_at(params: &EllipticREParams, t: f64) -> ([Vec4; 3], [Vec4; 3]) {
    params.orbit_at(t)
}

/// Builds the equal-mass elliptic relative equilibrium of radius `r`.
///
/// `z` is solved from `r² + y² + σz² = σ` with `z ≥ 0`. On the great circle
/// (σ = +1, r = 1) the frequency is not determined by the masses and must be
/// passed as `omega`; everywhere else `omega` must be `None`.
pub fn elliptic_lagrangian(
    sigma: Curvature,
    m: f64,
    r: f64,
    y: f64,
    omega: Option<f64>,
) -> Result<(EllipticREParams, State), EquilibriumError> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(EquilibriumError::InvalidParameter(format!(
            "mass must be positive, got {m}"
        )));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(EquilibriumError::InvalidRadius(format!(
            "r must be positive, got {r}"
        )));
    }
    if !y.is_finite() {
        return Err(EquilibriumError::InvalidParameter(format!(
            "y must be finite, got {y}"
        )));
    }
    let z = match sigma {
        Curvature::Positive => {
            if r > 1.0 {
                return Err(EquilibriumError::InvalidRadius(format!(
                    "r = {r} exceeds 1 on the sphere"
                )));
            }
            let z2 = 1.0 - r * r - y * y;
            if z2 < -1e-15 {
                return Err(EquilibriumError::InvalidRadius(format!(
                    "y² + r² = {} exceeds 1 on the sphere",
                    r * r + y * y
                )));
            }
            z2.max(0.0).sqrt()
        }
        Curvature::Negative => (1.0 + r * r + y * y).sqrt(),
    };
    let a = sigma.sigma() - 1.5 * r * r;
    let gap = (1.0 - a * a).abs();
    let great_circle = sigma == Curvature::Positive && r == 1.0;
    let omega = match (great_circle, omega) {
        (true, Some(w)) if w != 0.0 && w.is_finite() => w,
        (true, _) => {
            return Err(EquilibriumError::InvalidParameter(
                "the great-circle equilibrium needs an explicit nonzero omega".into(),
            ))
        }
        (false, Some(_)) => {
            return Err(EquilibriumError::InvalidParameter(
                "omega is determined by m and r away from the great circle".into(),
            ))
        }
        (false, None) => (3.0 * m / (gap * gap.sqrt())).sqrt(),
    };
    let params = EllipticREParams {
        sigma,
        m,
        r,
        y,
        z,
        omega,
        phases: TRIANGLE_PHASES,
    };
    Ok((params, params.state_at(0.0)))
}

/// Parameters of a positive elliptic-elliptic relative equilibrium (σ = +1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EEREParams {
    pub m: f64,
    pub alpha: f64,
    pub beta: f64,
    pub r: [f64; 3],
    pub rho: [f64; 3],
    pub a: [f64; 3],
    pub b: [f64; 3],
}

impl EEREParams {
    /// Same configuration with different frequencies.
    pub fn with_frequencies(&self, alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            ..*self
        }
    }

    pub fn orbit_at(&self, t: f64) -> ([Vec4; 3], [Vec4; 3]) {
        let mut pos = [Vec4::ZERO; 3];
        let mut vel = [Vec4::ZERO; 3];
        for i in 0..3 {
            let (sa, ca) = (self.alpha * t + self.a[i]).sin_cos();
            let (sb, cb) = (self.beta * t + self.b[i]).sin_cos();
            let (r, rho) = (self.r[i], self.rho[i]);
            pos[i] = Vec4::new(r * ca, r * sa, rho * cb, rho * sb);
            vel[i] = Vec4::new(
                -self.alpha * r * sa,
                self.alpha * r * ca,
                -self.beta * rho * sb,
                self.beta * rho * cb,
            );
        }
        (pos, vel)
    }

    pub fn acceleration_at(&self, t: f64) -> [Vec4; 3] {
        let (pos, _) = self.orbit_at(t);
        let (a2, b2) = (self.alpha * self.alpha, self.beta * self.beta);
        pos.map(|q| Vec4::new(-a2 * q.w, -a2 * q.x, -b2 * q.y, -b2 * q.z))
    }

    pub fn state_at(&self, t: f64) -> State {
        let (positions, velocities) = self.orbit_at(t);
        State {
            sigma: Curvature::Positive,
            masses: [self.m; 3],
            positions,
            velocities,
            time: t,
        }
    }

    /// The configuration as a criterion candidate with equal masses.
    pub fn candidate(&self) -> CandidateTriple {
        CandidateTriple {
            masses: [self.m; 3],
            r: self.r,
            rho: self.rho,
            a: self.a,
            b: self.b,
        }
    }
}

/// Builds the equal-mass elliptic-elliptic equilibrium with `α = β = omega`.
///
/// The triangle sits on the great circle spanned by `(cos φ, 0, sin φ, 0)` and
/// `(0, cos φ, 0, sin φ)` where φ is `tilt`, so `r_i = cos φ`, `ρ_i = sin φ`
/// and `a_i = b_i = 2πi/3`. Any `tilt` strictly inside `(0, π/2)` makes every
/// `r_i` and `ρ_i` nonzero.
pub fn elliptic_elliptic_lagrangian(
    m: f64,
    omega: f64,
    tilt: f64,
) -> Result<(EEREParams, State), EquilibriumError> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(EquilibriumError::InvalidParameter(format!(
            "mass must be positive, got {m}"
        )));
    }
    if omega == 0.0 || !omega.is_finite() {
        return Err(EquilibriumError::InvalidParameter(format!(
            "omega must be nonzero, got {omega}"
        )));
    }
    if !(0.0..=PI / 2.0).contains(&tilt) {
        return Err(EquilibriumError::InvalidParameter(format!(
            "tilt must lie in [0, π/2], got {tilt}"
        )));
    }
    let (sin_t, cos_t) = tilt.sin_cos();
    let params = EEREParams {
        m,
        alpha: omega,
        beta: omega,
        r: [cos_t; 3],
        rho: [sin_t; 3],
        a: TRIANGLE_PHASES,
        b: TRIANGLE_PHASES,
    };
    Ok((params, params.state_at(0.0)))
}

/// Euclidean norm of `closed_form_acceleration − RHS` of the equations of
/// motion, stacked over all bodies.
pub fn ode_residual(
    state: &State,
    closed_form_acceleration: &[Vec4; 3],
) -> Result<f64, DynamicsError> {
    let rhs = acceleration_of(
        &state.positions,
        &state.velocities,
        &state.masses,
        state.sigma,
    )?;
    Ok(rhs
        .iter()
        .zip(closed_form_acceleration)
        .map(|(f, a)| {
            let d = *a - *f;
            d.w * d.w + d.x * d.x + d.y * d.y + d.z * d.z
        })
        .sum::<f64>()
        .sqrt())
}

/// Unknowns of the fixed-point and elliptic-elliptic criterion equations
/// with independent masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateTriple {
    pub masses: [f64; 3],
    pub r: [f64; 3],
    pub rho: [f64; 3],
    pub a: [f64; 3],
    pub b: [f64; 3],
}

impl CandidateTriple {
    /// Gram couplings `ω_ij = r_i r_j cos(a_i − a_j) + ρ_i ρ_j cos(b_i − b_j)`.
    pub fn couplings(&self) -> [[f64; 3]; 3] {
        let mut w = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                w[i][j] = self.r[i] * self.r[j] * (self.a[i] - self.a[j]).cos()
                    + self.rho[i] * self.rho[j] * (self.b[i] - self.b[j]).cos();
            }
        }
        w
    }

    /// Positions at `t = 0` in the elliptic-elliptic form.
    pub fn positions(&self) -> [Vec4; 3] {
        [0, 1, 2].map(|i| {
            let (sa, ca) = self.a[i].sin_cos();
            let (sb, cb) = self.b[i].sin_cos();
            Vec4::new(
                self.r[i] * ca,
                self.r[i] * sa,
                self.rho[i] * cb,
                self.rho[i] * sb,
            )
        })
    }

    fn checked_couplings(&self) -> Result<[[f64; 3]; 3], EquilibriumError> {
        let w = self.couplings();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if w[i][j] * w[i][j] >= 1.0 {
                return Err(EquilibriumError::SingularPair {
                    i,
                    j,
                    coupling: w[i][j],
                });
            }
        }
        Ok(w)
    }

    /// Components `(r cos a, r sin a, ρ cos b, ρ sin b)` of body `i`.
    fn components(&self, i: usize) -> [f64; 4] {
        [
            self.r[i] * self.a[i].cos(),
            self.r[i] * self.a[i].sin(),
            self.rho[i] * self.b[i].cos(),
            self.rho[i] * self.b[i].sin(),
        ]
    }

    /// Left-hand sides `Σ_{j≠i} m_j (u_j − c_ij u_i) / (1 − c_ij²)^{3/2}` for
    /// each body and component, with the coupling chosen by `coupling`.
    fn criterion_sums(&self, coupling: impl Fn(usize, usize) -> f64) -> [[f64; 4]; 3] {
        let mut out = [[0.0; 4]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            let ui = self.components(i);
            for j in (0..3).filter(|&j| j != i) {
                let uj = self.components(j);
                let c = coupling(i, j);
                let den = (1.0 - c * c).powf(1.5);
                for k in 0..4 {
                    row[k] += self.masses[j] * (uj[k] - c * ui[k]) / den;
                }
            }
        }
        out
    }
}

/// Norm of the twelve fixed-point relationships for `c`.
pub fn fixed_point_residual(c: &CandidateTriple) -> Result<f64, EquilibriumError> {
    let w = c.checked_couplings()?;
    let sums = c.criterion_sums(|i, j| w[i][j]);
    Ok(sums.iter().flatten().map(|v| v * v).sum::<f64>().sqrt())
}

/// Norm of the elliptic-elliptic equations for an equilateral candidate with
/// common coupling `A`:
///
/// ```text
/// Σ m_j (r_j cos a_j − A r_i cos a_i)/(1 − A²)^{3/2} = r_i ρ_i² (β² − α²) cos a_i
/// Σ m_j (ρ_j cos b_j − A ρ_i cos b_i)/(1 − A²)^{3/2} = ρ_i r_i² (α² − β²) cos b_i
/// ```
///
/// and the analogous `sin` rows.
pub fn ee_residual(c: &CandidateTriple, alpha: f64, beta: f64) -> Result<f64, EquilibriumError> {
    let w = c.couplings();
    let pairs = [w[0][1], w[0][2], w[1][2]];
    let (lo, hi) = pairs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });
    let spread = hi - lo;
    if spread > EQUILATERAL_TOL {
        return Err(EquilibriumError::NotEquilateral { spread });
    }
    let a_common = pairs.iter().sum::<f64>() / 3.0;
    if a_common * a_common >= 1.0 {
        return Err(EquilibriumError::SingularPair {
            i: 0,
            j: 1,
            coupling: a_common,
        });
    }
    let sums = c.criterion_sums(|_, _| a_common);
    let dfreq = beta * beta - alpha * alpha;
    let mut total = 0.0;
    for (i, row) in sums.iter().enumerate() {
        let u = c.components(i);
        let (r, rho) = (c.r[i], c.rho[i]);
        let rhs = [
            rho * rho * dfreq * u[0],
            rho * rho * dfreq * u[1],
            -r * r * dfreq * u[2],
            -r * r * dfreq * u[3],
        ];
        total += row
            .iter()
            .zip(rhs)
            .map(|(l, r)| (l - r) * (l - r))
            .sum::<f64>();
    }
    Ok(total.sqrt())
}

/// Which of the two fixed-point-generation conditions a candidate meets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    /// `r_i ≈ 0` on the listed proper subset and `ρ_j ≈ 0` on its complement.
    ConditionI(Vec<usize>),
    /// `|α| ≈ |β|`.
    ConditionII,
    Neither,
}

/// Classifies a candidate; condition (i) is checked before condition (ii).
pub fn criterion_classify(c: &CandidateTriple, alpha: f64, beta: f64, tol: f64) -> Criterion {
    // masks 0..7 enumerate the proper subsets of {0, 1, 2}
    for mask in 0u8..7 {
        let in_j = |i: usize| mask & (1 << i) != 0;
        let holds = (0..3).all(|i| {
            if in_j(i) {
                c.r[i].abs() < tol
            } else {
                c.rho[i].abs() < tol
            }
        });
        if holds {
            return Criterion::ConditionI((0..3).filter(|&i| in_j(i)).collect());
        }
    }
    if (alpha.abs() - beta.abs()).abs() < tol {
        Criterion::ConditionII
    } else {
        Criterion::Neither
    }
}
