//! The curved 3-body vector field and its first integrals.
//!
//! For bodies `q_i` on S³ (σ = +1) or H³ (σ = -1) the equations of motion are
//!
//! ```text
//! q̈_i = Σ_{j≠i} m_j (q_j − σ q_ij q_i) / (σ − σ q_ij²)^{3/2} − σ (q̇_i·q̇_i) q_i
//! ```
//!
//! with `q_ij = q_i·q_j` taken in the metric selected by σ. The energy
//! `T − U` and the six wedge components of `Σ m_i q_i ∧ q̇_i` are conserved.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{inner, on_manifold, Curvature, Vec4, DEFAULT_MANIFOLD_TOL};

/// Pairs with `σ − σ q_ij²` at or below this value are treated as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-13;

/// Tolerance for the tangency constraint `q_i·q̇_i = 0` in [`State::validate`].
pub const DEFAULT_TANGENCY_TOL: f64 = 1e-10;

/// Coordinate planes of the angular-momentum components, in output order.
pub const MOMENTUM_PLANES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Column labels matching [`MOMENTUM_PLANES`].
pub const MOMENTUM_LABELS: [&str; 6] = ["c_wx", "c_wy", "c_wz", "c_xy", "c_xz", "c_yz"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    /// `σ − σ q_ij² ≤` [`SINGULARITY_THRESHOLD`]. `antipodal` distinguishes
    /// the S³ case `q_ij ≈ −1` from a collision.
    #[error("singular configuration between bodies {i} and {j}{}", if *antipodal { " (antipodal)" } else { " (collision)" })]
    Singularity { i: usize, j: usize, antipodal: bool },
    #[error("invalid state: {0}")]
    InvalidState(String),
}

/// Masses, positions and velocities of the three bodies at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub sigma: Curvature,
    pub masses: [f64; 3],
    pub positions: [Vec4; 3],
    pub velocities: [Vec4; 3],
    #[serde(default)]
    pub time: f64,
}

impl State {
    /// Builds a state and checks it with [`State::validate`].
    pub fn new(
        sigma: Curvature,
        masses: [f64; 3],
        positions: [Vec4; 3],
        velocities: [Vec4; 3],
    ) -> Result<Self, DynamicsError> {
        let state = Self {
            sigma,
            masses,
            positions,
            velocities,
            time: 0.0,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn at_rest(
        sigma: Curvature,
        masses: [f64; 3],
        positions: [Vec4; 3],
    ) -> Result<Self, DynamicsError> {
        Self::new(sigma, masses, positions, [Vec4::ZERO; 3])
    }

    /// Checks positive masses, manifold membership and tangency with the default tolerances.
    pub fn validate(&self) -> Result<(), DynamicsError> {
        for (i, &m) in self.masses.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(DynamicsError::InvalidState(format!(
                    "mass {i} must be positive, got {m}"
                )));
            }
        }
        for i in 0..3 {
            let (q, v) = (self.positions[i], self.velocities[i]);
            if !on_manifold(q, self.sigma, DEFAULT_MANIFOLD_TOL) {
                return Err(DynamicsError::InvalidState(format!(
                    "position {i} = {:?} is not on the manifold for sigma = {}",
                    q.to_array(),
                    self.sigma
                )));
            }
            if !v.is_finite() {
                return Err(DynamicsError::InvalidState(format!(
                    "velocity {i} is not finite"
                )));
            }
            let tangency = inner(q, v, self.sigma);
            if tangency.abs() > DEFAULT_TANGENCY_TOL * (1.0 + v.euclidean_norm()) {
                return Err(DynamicsError::InvalidState(format!(
                    "velocity {i} is not tangent: q·v = {tangency:e}"
                )));
            }
        }
        Ok(())
    }

    /// Applies the same linear map to every position and velocity.
    pub fn map_vectors(&self, f: impl Fn(Vec4) -> Vec4) -> Self {
        Self {
            positions: self.positions.map(&f),
            velocities: self.velocities.map(&f),
            ..*self
        }
    }
}

/// Energy and angular momentum at one instant of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantRecord {
    pub time: f64,
    pub h: f64,
    pub c: [f64; 6],
}

impl InvariantRecord {
    pub fn of(state: &State) -> Result<Self, DynamicsError> {
        Ok(Self {
            time: state.time,
            h: energy(state)?,
            c: angular_momentum(state),
        })
    }
}

/// Gram matrix `q_ij = q_i·q_j` of the positions.
pub fn pairwise_q(state: &State) -> [[f64; 3]; 3] {
    gram(&state.positions, state.sigma)
}

pub(crate) fn gram(positions: &[Vec4; 3], sigma: Curvature) -> [[f64; 3]; 3] {
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let v = inner(positions[i], positions[j], sigma);
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    g
}

/// `σ − σ q_ij²`, rejecting singular pairs.
#[inline]
fn pair_gap(q_ij: f64, sigma: Curvature, i: usize, j: usize) -> Result<f64, DynamicsError> {
    let s = sigma.sigma();
    let gap = s - s * q_ij * q_ij;
    if gap > SINGULARITY_THRESHOLD {
        Ok(gap)
    } else {
        Err(DynamicsError::Singularity {
            i,
            j,
            antipodal: sigma == Curvature::Positive && q_ij < 0.0,
        })
    }
}

/// Gravitational part of the vector field, without the constraint term.
pub fn attraction_terms(
    positions: &[Vec4; 3],
    masses: &[f64; 3],
    sigma: Curvature,
) -> Result<[Vec4; 3], DynamicsError> {
    let s = sigma.sigma();
    let mut acc = [Vec4::ZERO; 3];
    for i in 0..3 {
        for j in (i + 1)..3 {
            let q_ij = inner(positions[i], positions[j], sigma);
            let gap = pair_gap(q_ij, sigma, i, j)?;
            let inv = 1.0 / (gap * gap.sqrt());
            acc[i] += (positions[j] - positions[i] * (s * q_ij)) * (masses[j] * inv);
            acc[j] += (positions[i] - positions[j] * (s * q_ij)) * (masses[i] * inv);
        }
    }
    Ok(acc)
}

/// Gravitational part of the vector field for `state`.
pub fn attraction(state: &State) -> Result<[Vec4; 3], DynamicsError> {
    attraction_terms(&state.positions, &state.masses, state.sigma)
}

/// Full right-hand side of the equations of motion for each body.
pub fn acceleration(state: &State) -> Result<[Vec4; 3], DynamicsError> {
    acceleration_of(
        &state.positions,
        &state.velocities,
        &state.masses,
        state.sigma,
    )
}

pub(crate) fn acceleration_of(
    positions: &[Vec4; 3],
    velocities: &[Vec4; 3],
    masses: &[f64; 3],
    sigma: Curvature,
) -> Result<[Vec4; 3], DynamicsError> {
    let s = sigma.sigma();
    let mut acc = attraction_terms(positions, masses, sigma)?;
    for i in 0..3 {
        let vv = inner(velocities[i], velocities[i], sigma);
        acc[i] -= positions[i] * (s * vv);
    }
    Ok(acc)
}

/// Force function `U = σ Σ_{i<j} m_i m_j q_ij / (σ − σ q_ij²)^{1/2}`; `−U` is the potential.
pub fn force_function(state: &State) -> Result<f64, DynamicsError> {
    force_function_of(&state.positions, &state.masses, state.sigma)
}

/// [`force_function`] on bare positions; callers may pass off-manifold points.
pub fn force_function_of(
    positions: &[Vec4; 3],
    masses: &[f64; 3],
    sigma: Curvature,
) -> Result<f64, DynamicsError> {
    let mut u = 0.0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let q_ij = inner(positions[i], positions[j], sigma);
            let gap = pair_gap(q_ij, sigma, i, j)?;
            u += masses[i] * masses[j] * q_ij / gap.sqrt();
        }
    }
    Ok(sigma.sigma() * u)
}

/// Kinetic energy `T = (σ/2) Σ m_i q_ii (q̇_i·q̇_i)`, with `q_ii` evaluated rather than assumed.
pub fn kinetic_energy(state: &State) -> f64 {
    let sigma = state.sigma;
    let sum: f64 = (0..3)
        .map(|i| {
            let q = state.positions[i];
            let v = state.velocities[i];
            state.masses[i] * inner(q, q, sigma) * inner(v, v, sigma)
        })
        .sum();
    0.5 * sigma.sigma() * sum
}

/// Energy constant `h = T − U`.
pub fn energy(state: &State) -> Result<f64, DynamicsError> {
    Ok(kinetic_energy(state) - force_function(state)?)
}

/// The six components `(c_wx, c_wy, c_wz, c_xy, c_xz, c_yz)` of `Σ m_i q_i ∧ q̇_i`.
pub fn angular_momentum(state: &State) -> [f64; 6] {
    let mut c = [0.0; 6];
    for (k, &(a, b)) in MOMENTUM_PLANES.iter().enumerate() {
        c[k] = (0..3)
            .map(|i| {
                let (q, v) = (state.positions[i], state.velocities[i]);
                state.masses[i] * (q[a] * v[b] - v[a] * q[b])
            })
            .sum();
    }
    c
}
