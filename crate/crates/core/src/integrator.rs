//! Fixed-step RK4 integration with projection back onto the constraint set.
//!
//! After every `projection_every` steps positions are renormalized onto the
//! manifold and velocities projected onto the tangent space. Constraint and
//! invariant drift is measured at every step and summarized in [`Drift`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    acceleration_of, angular_momentum, energy, DynamicsError, InvariantRecord, State,
};
use crate::geometry::{inner, renormalize, tangent_project, GeometryError, Vec4};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("{source} at t = {time}")]
    Dynamics { time: f64, source: DynamicsError },
    #[error("projection failed at t = {time}: {source}")]
    Projection { time: f64, source: GeometryError },
    #[error("invalid integrator configuration: {0}")]
    Config(String),
}

impl IntegrationError {
    /// Time at which the run failed, if it failed mid-run.
    pub fn time(&self) -> Option<f64> {
        match self {
            IntegrationError::Dynamics { time, .. } | IntegrationError::Projection { time, .. } => {
                Some(*time)
            }
            IntegrationError::Config(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub projection_every: usize,
    pub record_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            projection_every: 1,
            record_every: 10,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegrationError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(IntegrationError::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(IntegrationError::Config(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.projection_every == 0 || self.record_every == 0 {
            return Err(IntegrationError::Config(
                "projection_every and record_every must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Worst deviations observed along a run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Drift {
    /// max |q_ii − σ|
    pub constraint: f64,
    /// max |q_i·q̇_i|
    pub tangency: f64,
    /// max |h(t) − h(0)|
    pub energy: f64,
    /// max |c_k(t) − c_k(0)| for each angular-momentum component
    pub momentum: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<State>,
    pub invariants_log: Vec<InvariantRecord>,
    pub drift: Drift,
}

impl Trajectory {
    pub fn final_state(&self) -> &State {
        self.samples
            .last()
            .expect("a trajectory always holds its initial state")
    }
}

fn dynamics_err(time: f64) -> impl Fn(DynamicsError) -> IntegrationError {
    move |source| IntegrationError::Dynamics { time, source }
}

/// One classical RK4 step of size `dt` without projection. `dt` may be negative.
pub fn rk4_step(state: &State, dt: f64) -> Result<State, DynamicsError> {
    let (m, s) = (&state.masses, state.sigma);
    let q0 = state.positions;
    let v0 = state.velocities;
    let shift = |base: &[Vec4; 3], d: &[Vec4; 3], h: f64| -> [Vec4; 3] {
        [0, 1, 2].map(|i| base[i] + d[i] * h)
    };

    let a1 = acceleration_of(&q0, &v0, m, s)?;
    let (q2, v2) = (shift(&q0, &v0, 0.5 * dt), shift(&v0, &a1, 0.5 * dt));
    let a2 = acceleration_of(&q2, &v2, m, s)?;
    let (q3, v3) = (shift(&q0, &v2, 0.5 * dt), shift(&v0, &a2, 0.5 * dt));
    let a3 = acceleration_of(&q3, &v3, m, s)?;
    let (q4, v4) = (shift(&q0, &v3, dt), shift(&v0, &a3, dt));
    let a4 = acceleration_of(&q4, &v4, m, s)?;

    let h6 = dt / 6.0;
    let mut next = *state;
    for i in 0..3 {
        next.positions[i] = q0[i] + (v0[i] + (v2[i] + v3[i]) * 2.0 + v4[i]) * h6;
        next.velocities[i] = v0[i] + (a1[i] + (a2[i] + a3[i]) * 2.0 + a4[i]) * h6;
    }
    next.time = state.time + dt;
    Ok(next)
}

/// Renormalizes positions and tangent-projects velocities.
pub fn project_state(state: &State) -> Result<State, GeometryError> {
    let mut out = *state;
    for i in 0..3 {
        let q = renormalize(state.positions[i], state.sigma)?;
        out.positions[i] = q;
        out.velocities[i] = tangent_project(q, state.velocities[i], state.sigma)?;
    }
    Ok(out)
}

/// RK4 step followed by projection.
pub fn step(state: &State, dt: f64) -> Result<State, IntegrationError> {
    let raw = rk4_step(state, dt).map_err(dynamics_err(state.time))?;
    project_state(&raw).map_err(|source| IntegrationError::Projection {
        time: raw.time,
        source,
    })
}

/// Integrates from `state` to `state.time + cfg.t_end`.
///
/// The last step is shortened so the run ends exactly at `t_end`. The initial
/// and final states are always recorded.
pub fn integrate(state: &State, cfg: &IntegratorConfig) -> Result<Trajectory, IntegrationError> {
    cfg.validate()?;
    let t0 = state.time;
    let n_steps = (cfg.t_end / cfg.dt - 1e-9).ceil().max(1.0) as usize;

    let first = InvariantRecord::of(state).map_err(dynamics_err(t0))?;
    let mut samples = vec![*state];
    let mut log = vec![first];
    let mut drift = Drift::default();
    track_constraints(state, &mut drift);

    let mut current = *state;
    for n in 1..=n_steps {
        let target = if n == n_steps {
            t0 + cfg.t_end
        } else {
            t0 + n as f64 * cfg.dt
        };
        let h = target - current.time;
        let mut next = rk4_step(&current, h).map_err(dynamics_err(current.time))?;
        next.time = target;
        if n % cfg.projection_every == 0 {
            next = project_state(&next).map_err(|source| IntegrationError::Projection {
                time: target,
                source,
            })?;
        }
        track_constraints(&next, &mut drift);
        let h_now = energy(&next).map_err(dynamics_err(target))?;
        let c_now = angular_momentum(&next);
        drift.energy = drift.energy.max((h_now - first.h).abs());
        for k in 0..6 {
            drift.momentum[k] = drift.momentum[k].max((c_now[k] - first.c[k]).abs());
        }
        if n % cfg.record_every == 0 || n == n_steps {
            samples.push(next);
            log.push(InvariantRecord {
                time: target,
                h: h_now,
                c: c_now,
            });
        }
        current = next;
    }
    Ok(Trajectory {
        samples,
        invariants_log: log,
        drift,
    })
}

fn track_constraints(state: &State, drift: &mut Drift) {
    let s = state.sigma;
    for i in 0..3 {
        let q = state.positions[i];
        drift.constraint = drift.constraint.max((inner(q, q, s) - s.sigma()).abs());
        drift.tangency = drift.tangency.max(inner(q, state.velocities[i], s).abs());
    }
}
