//! Workload metrics computed from traffic traces.

use serde::{Deserialize, Serialize};

use crate::coding::{state_matrix, Grid, SurfaceConfig};
use crate::error::{Error, Result};
use crate::gateway::{diff_states, TrafficTrace};
use crate::geometry::Angles;

/// Share of all packets addressed to each cell.
#[derive(Clone, Debug, PartialEq)]
pub struct DestinationMatrix {
    pub ratios: Grid<f64>,
}

impl DestinationMatrix {
    pub fn n_cols(&self) -> usize {
        self.ratios.n_cols()
    }

    pub fn n_rows(&self) -> usize {
        self.ratios.n_rows()
    }

    /// Population coefficient of variation of the entries; 0 for an
    /// all-zero matrix.
    pub fn spatial_cv(&self) -> f64 {
        coefficient_of_variation(self.ratios.as_slice())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateMode {
    /// One point per event after the first: burst size over the gap to the
    /// previous event.
    PerBurst,
    /// Packets per fixed-width bin over the trajectory span, at bin midpoints.
    Binned { bin: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RateSeries {
    /// `(t, rate)`; `t` in seconds, rate per second.
    pub points: Vec<(f64, f64)>,
}

impl RateSeries {
    /// Point with the highest rate; the earliest wins ties.
    pub fn peak(&self) -> Option<(f64, f64)> {
        self.points
            .iter()
            .copied()
            .reduce(|best, p| if p.1 > best.1 { p } else { best })
    }

    pub fn median_rate(&self) -> Option<f64> {
        let mut rates: Vec<f64> = self.points.iter().map(|p| p.1).collect();
        if rates.is_empty() {
            return None;
        }
        rates.sort_by(f64::total_cmp);
        let mid = rates.len() / 2;
        Some(if rates.len() % 2 == 1 {
            rates[mid]
        } else {
            0.5 * (rates[mid - 1] + rates[mid])
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadReport {
    pub per_event_changed_fraction: Vec<f64>,
    pub total_packets: usize,
    pub burst_sizes: Vec<usize>,
    /// Gaps between consecutive events; one shorter than the event list.
    pub inter_event_times: Vec<f64>,
    pub spatial_cv: f64,
}

/// Changed-cell fraction of every event.
pub fn percent_changed(trace: &TrafficTrace) -> Vec<f64> {
    let cells = trace.n_cells() as f64;
    trace
        .events
        .iter()
        .map(|e| e.updates.len() as f64 / cells)
        .collect()
}

/// Packets received by each cell over the whole trace.
pub fn packet_counts(trace: &TrafficTrace) -> Grid<u64> {
    let s = &trace.meta.surface;
    let mut counts = Grid::filled(s.n_cols, s.n_rows, 0u64);
    for u in trace.events.iter().flat_map(|e| &e.updates) {
        counts.set(u.col, u.row, counts.get(u.col, u.row) + 1);
    }
    counts
}

pub fn destination_matrix(trace: &TrafficTrace) -> DestinationMatrix {
    destination_from_counts(&packet_counts(trace))
}

pub fn destination_from_counts(counts: &Grid<u64>) -> DestinationMatrix {
    let total: u64 = counts.as_slice().iter().sum();
    let ratios = Grid::from_fn(counts.n_cols(), counts.n_rows(), |i, j| {
        if total == 0 {
            0.0
        } else {
            counts.get(i, j) as f64 / total as f64
        }
    });
    DestinationMatrix { ratios }
}

pub fn coefficient_of_variation(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Packet injection rate.
pub fn injection_rate(trace: &TrafficTrace, mode: RateMode) -> Result<RateSeries> {
    rate_series(trace, mode, |e| e.updates.len() as f64)
}

/// Reconfiguration-request rate: like [`injection_rate`] but each event
/// counts once regardless of its size.
pub fn request_rate(trace: &TrafficTrace, mode: RateMode) -> Result<RateSeries> {
    rate_series(trace, mode, |_| 1.0)
}

fn rate_series(
    trace: &TrafficTrace,
    mode: RateMode,
    weight: impl Fn(&crate::gateway::ReconfigEvent) -> f64,
) -> Result<RateSeries> {
    let events = &trace.events;
    let points = match mode {
        RateMode::PerBurst => events
            .windows(2)
            .map(|w| (w[1].t, weight(&w[1]) / (w[1].t - w[0].t)))
            .collect(),
        RateMode::Binned { bin } => {
            if !(bin.is_finite() && bin > 0.0) {
                return Err(Error::validation("bin", format!("{bin} must be > 0")));
            }
            let span = trace.meta.trajectory.duration();
            let n_bins = ((span / bin).ceil() as usize).max(1);
            let mut totals = vec![0.0; n_bins];
            for e in events {
                let k = ((e.t / bin).floor().max(0.0) as usize).min(n_bins - 1);
                totals[k] += weight(e);
            }
            totals
                .into_iter()
                .enumerate()
                .map(|(k, total)| ((k as f64 + 0.5) * bin, total / bin))
                .collect()
        }
    };
    Ok(RateSeries { points })
}

/// Fraction of cells that change when steering moves from `from` to `to`.
pub fn sweep_diff(from: Angles, to: Angles, surface: &SurfaceConfig, incident: Angles) -> Result<f64> {
    let a = state_matrix(incident, from, surface)?;
    let b = state_matrix(incident, to, surface)?;
    Ok(diff_states(&a, &b)?.len() as f64 / surface.n_cells() as f64)
}

/// Changed fraction for each consecutive pair of polar angles from
/// `start` down to 0 in steps of `step`, at fixed azimuth.
pub fn sweep_grid(
    start: f64,
    step: f64,
    phi: f64,
    surface: &SurfaceConfig,
    incident: Angles,
) -> Result<Vec<(f64, f64, f64)>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::validation("grid", format!("{step} must be > 0")));
    }
    let mut levels: Vec<f64> = (0u32..)
        .map(|k| start - f64::from(k) * step)
        .take_while(|&th| th > 0.0)
        .collect();
    levels.push(0.0);
    levels
        .windows(2)
        .map(|w| {
            let from = Angles::new(w[0], phi)?;
            let to = Angles::new(w[1], phi)?;
            Ok((w[0], w[1], sweep_diff(from, to, surface, incident)?))
        })
        .collect()
}

pub fn burst_stats(trace: &TrafficTrace) -> WorkloadReport {
    let burst_sizes: Vec<usize> = trace.events.iter().map(|e| e.updates.len()).collect();
    WorkloadReport {
        per_event_changed_fraction: percent_changed(trace),
        total_packets: burst_sizes.iter().sum(),
        burst_sizes,
        inter_event_times: trace.events.windows(2).map(|w| w[1].t - w[0].t).collect(),
        spatial_cv: destination_matrix(trace).spatial_cv(),
    }
}
