//! Gateway emulation: threshold-triggered reconfiguration, state-matrix
//! diffs and trace construction.
//!
//! The gateway starts from the all-zero matrix. The first sample of the
//! angle stream always configures the surface; afterwards a reconfiguration
//! fires whenever the polar angle or the azimuth has drifted by at least the
//! angular step. Each state-changing cell receives exactly one packet.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::coding::{state_matrix, StateMatrix, SurfaceConfig};
use crate::error::{Error, Result};
use crate::geometry::{circular_delta, wrap_degrees, Angles, Trajectory};

/// `created` stamp used when the caller does not supply one. Keeps traces
/// byte-reproducible.
pub const DEFAULT_CREATED: &str = "1970-01-01T00:00:00Z";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GatewayConfig {
    /// Angular step `a`, degrees.
    pub angular_step: f64,
    /// Sampling period of the angle stream, s.
    pub sample_dt: f64,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            angular_step: 5.0,
            sample_dt: 1e-3,
        }
    }
}

impl GatewayConfig {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("gateway.angular_step", self.angular_step),
            ("gateway.sample_dt", self.sample_dt),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(key, format!("{v} must be > 0")));
            }
        }
        Ok(())
    }
}

/// One packet: cell `(col, row)` switches to `new_state`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellUpdate {
    pub col: usize,
    pub row: usize,
    pub new_state: u16,
}

/// One gateway burst.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconfigEvent {
    pub t: f64,
    /// Target direction the surface is configured for after this event.
    pub reflected: Angles,
    pub updates: Vec<CellUpdate>,
}

/// Everything needed to regenerate a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub surface: SurfaceConfig,
    pub gateway: GatewayConfig,
    pub incident: Angles,
    pub trajectory: Trajectory,
}

impl TraceMeta {
    pub fn validate(&self) -> Result<()> {
        self.surface.validate()?;
        self.gateway.validate()?;
        Angles::new(self.incident.theta, self.incident.phi).map_err(|e| match e {
            Error::Validation { reason, .. } => Error::validation("incidence", reason),
            e => e,
        })?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrafficTrace {
    pub meta: TraceMeta,
    /// Free-form creation stamp carried in the file header.
    pub created: String,
    pub events: Vec<ReconfigEvent>,
}

impl TrafficTrace {
    pub fn n_cells(&self) -> usize {
        self.meta.surface.n_cells()
    }

    pub fn total_packets(&self) -> usize {
        self.events.iter().map(|e| e.updates.len()).sum()
    }

    /// Applies every update in order to the all-zero matrix.
    pub fn replay(&self) -> StateMatrix {
        let mut m = StateMatrix::zeros(&self.meta.surface);
        for ev in &self.events {
            apply_updates(&mut m, &ev.updates);
        }
        m
    }

    /// Checks the structural invariants and replay soundness.
    pub fn validate(&self) -> Result<()> {
        self.meta.validate()?;
        let surface = &self.meta.surface;
        let mut current = StateMatrix::zeros(surface);
        let mut prev_t = f64::NEG_INFINITY;
        for (k, ev) in self.events.iter().enumerate() {
            if !ev.t.is_finite() || ev.t <= prev_t {
                return Err(Error::Invariant {
                    invariant: "event times strictly increasing",
                    detail: format!("event {k} at t={} follows t={prev_t}", ev.t),
                });
            }
            prev_t = ev.t;
            if Angles::new(ev.reflected.theta, ev.reflected.phi).is_err() {
                return Err(Error::Invariant {
                    invariant: "reflected direction in front of surface",
                    detail: format!(
                        "event {k} has theta={} phi={}",
                        ev.reflected.theta, ev.reflected.phi
                    ),
                });
            }
            let mut seen = HashSet::with_capacity(ev.updates.len());
            for u in &ev.updates {
                if u.col >= surface.n_cols
                    || u.row >= surface.n_rows
                    || usize::from(u.new_state) >= surface.n_states
                {
                    return Err(Error::Invariant {
                        invariant: "updates within bounds",
                        detail: format!(
                            "event {k} update ({}, {}, {}) outside {}x{} grid with {} states",
                            u.col, u.row, u.new_state, surface.n_cols, surface.n_rows, surface.n_states
                        ),
                    });
                }
                if !seen.insert((u.col, u.row)) {
                    return Err(Error::Invariant {
                        invariant: "no duplicate cells per event",
                        detail: format!("event {k} updates cell ({}, {}) twice", u.col, u.row),
                    });
                }
                if current.get(u.col, u.row) == u.new_state {
                    return Err(Error::Invariant {
                        invariant: "updates change state",
                        detail: format!(
                            "event {k} sets cell ({}, {}) to its current state {}",
                            u.col, u.row, u.new_state
                        ),
                    });
                }
            }
            apply_updates(&mut current, &ev.updates);
        }
        if let Some(last) = self.events.last() {
            let expected = state_matrix(self.meta.incident, last.reflected, surface)?;
            if expected != current {
                return Err(Error::Invariant {
                    invariant: "replay reproduces final state matrix",
                    detail: format!(
                        "replayed matrix differs from the ideal matrix for theta={} phi={}",
                        last.reflected.theta, last.reflected.phi
                    ),
                });
            }
        }
        Ok(())
    }
}

pub fn apply_updates(m: &mut StateMatrix, updates: &[CellUpdate]) {
    for u in updates {
        m.set(u.col, u.row, u.new_state);
    }
}

/// Picks the reconfiguration instants out of a sampled angle stream.
///
/// Each angle keeps a reference level that starts at the first sample and
/// moves in whole multiples of `angular_step`. A sample fires when either
/// angle sits at least one step away from its level (azimuth measured
/// circularly); the levels then advance by the number of whole steps
/// crossed. Emitted angles are the raw samples.
pub fn detect_events(stream: &[(f64, Angles)], angular_step: f64) -> Result<Vec<(f64, Angles)>> {
    let Some(&first) = stream.first() else {
        return Err(Error::validation("stream", "angle stream is empty"));
    };
    if !(angular_step.is_finite() && angular_step > 0.0) {
        return Err(Error::validation(
            "gateway.angular_step",
            format!("{angular_step} must be > 0"),
        ));
    }
    if let Some(w) = stream
        .windows(2)
        .find(|w| w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::validation(
            "stream",
            format!("sample times not strictly increasing at t={}", w[1].0),
        ));
    }

    let whole_steps = |delta: f64| (delta.abs() / angular_step).floor().copysign(delta) * angular_step;
    let mut theta_level = first.1.theta;
    let mut phi_level = first.1.phi;
    let mut events = vec![first];
    for &(t, angles) in &stream[1..] {
        let d_theta = angles.theta - theta_level;
        let d_phi = circular_delta(phi_level, angles.phi);
        if d_theta.abs() >= angular_step || d_phi.abs() >= angular_step {
            events.push((t, angles));
            theta_level += whole_steps(d_theta);
            phi_level = wrap_degrees(phi_level + whole_steps(d_phi));
        }
    }
    Ok(events)
}

/// Cells where `new` differs from `old`, row-major.
pub fn diff_states(old: &StateMatrix, new: &StateMatrix) -> Result<Vec<CellUpdate>> {
    if old.dims() != new.dims() {
        return Err(Error::DimensionMismatch {
            left_cols: old.n_cols(),
            left_rows: old.n_rows(),
            right_cols: new.n_cols(),
            right_rows: new.n_rows(),
        });
    }
    Ok(old
        .iter_cells()
        .zip(new.as_slice())
        .filter(|((_, _, before), &after)| *before != after)
        .map(|((col, row, _), &new_state)| CellUpdate { col, row, new_state })
        .collect())
}

/// Turns a list of reconfiguration instants into a trace. Every instant
/// becomes an event, including ones whose diff is empty.
pub fn build_trace(meta: TraceMeta, event_angles: &[(f64, Angles)]) -> Result<TrafficTrace> {
    meta.validate()?;
    let mut current = StateMatrix::zeros(&meta.surface);
    let mut events = Vec::with_capacity(event_angles.len());
    for &(t, reflected) in event_angles {
        let next = state_matrix(meta.incident, reflected, &meta.surface)?;
        let updates = diff_states(&current, &next)?;
        current = next;
        events.push(ReconfigEvent {
            t,
            reflected,
            updates,
        });
    }
    Ok(TrafficTrace {
        meta,
        created: DEFAULT_CREATED.to_owned(),
        events,
    })
}

/// Samples the trajectory, detects events and builds the trace.
pub fn run_simulation(
    trajectory: &Trajectory,
    surface: &SurfaceConfig,
    gateway: &GatewayConfig,
    incident: Angles,
) -> Result<TrafficTrace> {
    let meta = TraceMeta {
        surface: *surface,
        gateway: *gateway,
        incident,
        trajectory: trajectory.clone(),
    };
    meta.validate()?;
    let stream = trajectory.angle_stream(gateway.sample_dt)?;
    let events = detect_events(&stream, gateway.angular_step)?;
    build_trace(meta, &events)
}

/// Re-runs the scenario recorded in a trace header.
pub fn rerun(meta: &TraceMeta) -> Result<TrafficTrace> {
    run_simulation(&meta.trajectory, &meta.surface, &meta.gateway, meta.incident)
}
