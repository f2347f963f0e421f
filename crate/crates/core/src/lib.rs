//! Control-traffic workload simulator for programmable metasurfaces.
//!
//! A moving target is tracked by a metasurface doing anomalous reflection.
//! Each time the target direction drifts by the gateway's angular step, a new
//! quantized unit-cell state matrix is computed, diffed against the current
//! one, and one packet is emitted per cell whose state changes. The resulting
//! traces feed the metric routines in [`metrics`] and persist through
//! [`trace_io`].
//!
//! The pipeline, bottom up:
//!
//! * [`geometry`]: trajectories for the three mobility cases and the
//!   position to reflection-angle mapping.
//! * [`coding`]: phase gradients, per-cell ideal phases and quantization.
//! * [`gateway`]: event detection, matrix diffs and trace construction.
//! * [`metrics`]: changed-cell fractions, destination matrix, rates, bursts.
//! * [`trace_io`]: line-delimited JSON traces, reports and heat maps.
//! * [`scenario`]: the on-disk scenario configuration and dotted overrides.

pub mod coding;
pub mod error;
pub mod gateway;
pub mod geometry;
pub mod metrics;
pub mod scenario;
pub mod trace_io;

pub use coding::{PhaseGradient, PhaseMatrix, StateMatrix, SurfaceConfig};
pub use error::{Error, Result};
pub use gateway::{CellUpdate, GatewayConfig, ReconfigEvent, TraceMeta, TrafficTrace};
pub use geometry::{Angles, CaseId, CaseParams, Point3D, Trajectory};
pub use metrics::{DestinationMatrix, RateMode, RateSeries, WorkloadReport};
pub use scenario::ScenarioConfig;
