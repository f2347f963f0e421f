//! Metasurface coding: phase gradients from wave-vector momentum
//! conservation, per-cell ideal phases, and quantization onto the discrete
//! unit-cell states.
//!
//! Cell `(i, j)` is column `i` (along x) and row `j` (along y), both
//! 0-based, with its phase evaluated at `(i * d_u, j * d_u)`. Matrices are
//! stored row-major: `j` outer, `i` inner.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Angles;

/// Fraction of a state step inside which a phase counts as equidistant
/// between two neighbouring states.
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceConfig {
    /// Columns (N), along x.
    pub n_cols: usize,
    /// Rows (M), along y.
    pub n_rows: usize,
    /// Unit-cell side, m.
    pub d_u: f64,
    /// Discrete phase states per cell (N_s).
    pub n_states: usize,
    /// Incident wavelength, m.
    pub lambda_i: f64,
    /// Reflected wavelength, m.
    pub lambda_r: f64,
}

impl Default for SurfaceConfig {
    /// 50x50 cells, four states, 10 GHz on both sides, quarter-wave pitch.
    fn default() -> Self {
        SurfaceConfig {
            n_cols: 50,
            n_rows: 50,
            d_u: 0.0075,
            n_states: 4,
            lambda_i: 0.03,
            lambda_r: 0.03,
        }
    }
}

impl SurfaceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_cols < 1 {
            return Err(Error::validation("surface.n_cols", "must be >= 1"));
        }
        if self.n_rows < 1 {
            return Err(Error::validation("surface.n_rows", "must be >= 1"));
        }
        if self.n_states < 2 {
            return Err(Error::validation(
                "surface.n_states",
                format!("{} must be >= 2", self.n_states),
            ));
        }
        if self.n_states > usize::from(u16::MAX) {
            return Err(Error::validation("surface.n_states", "must fit in 16 bits"));
        }
        for (key, v) in [
            ("surface.d_u", self.d_u),
            ("wave.lambda_i", self.lambda_i),
            ("wave.lambda_r", self.lambda_r),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(key, format!("{v} must be > 0")));
            }
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.n_cols * self.n_rows
    }

    pub fn k_incident(&self) -> f64 {
        TAU / self.lambda_i
    }

    pub fn k_reflected(&self) -> f64 {
        TAU / self.lambda_r
    }
}

/// Linear phase gradient across the surface, rad/m.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGradient {
    pub gx: f64,
    pub gy: f64,
}

/// Dense `n_cols x n_rows` grid, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Grid<T> {
    n_cols: usize,
    n_rows: usize,
    cells: Vec<T>,
}

impl<T: Copy> Grid<T> {
    pub fn filled(n_cols: usize, n_rows: usize, value: T) -> Self {
        Grid {
            n_cols,
            n_rows,
            cells: vec![value; n_cols * n_rows],
        }
    }

    pub fn from_fn(n_cols: usize, n_rows: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut cells = Vec::with_capacity(n_cols * n_rows);
        for j in 0..n_rows {
            for i in 0..n_cols {
                cells.push(f(i, j));
            }
        }
        Grid {
            n_cols,
            n_rows,
            cells,
        }
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_cols, self.n_rows)
    }

    pub fn get(&self, col: usize, row: usize) -> T {
        self.cells[self.index(col, row)]
    }

    pub fn set(&mut self, col: usize, row: usize, value: T) {
        let idx = self.index(col, row);
        self.cells[idx] = value;
    }

    /// `(col, row, value)` in row-major order.
    pub fn iter_cells(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(|(k, &v)| (k % self.n_cols, k / self.n_cols, v))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.cells
    }

    /// Values of row `j`, indexed by column.
    pub fn row(&self, j: usize) -> &[T] {
        &self.cells[j * self.n_cols..(j + 1) * self.n_cols]
    }

    fn index(&self, col: usize, row: usize) -> usize {
        assert!(
            col < self.n_cols && row < self.n_rows,
            "cell ({col}, {row}) outside {}x{} grid",
            self.n_cols,
            self.n_rows
        );
        row * self.n_cols + col
    }
}

/// Ideal per-cell phases in [0, 2π).
pub type PhaseMatrix = Grid<f64>;

/// Quantized per-cell state indices in [0, n_states).
pub type StateMatrix = Grid<u16>;

impl StateMatrix {
    pub fn zeros(cfg: &SurfaceConfig) -> Self {
        Grid::filled(cfg.n_cols, cfg.n_rows, 0)
    }
}

/// Reduces an angle in radians into [0, 2π). Negative inputs come back
/// exactly (no sign-dependent truncation).
pub fn reduce_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn check_direction(name: &str, a: Angles) -> Result<()> {
    if !a.theta.is_finite() || !a.phi.is_finite() {
        return Err(Error::validation(name, "angles must be finite"));
    }
    if !(0.0..90.0).contains(&a.theta) {
        return Err(Error::validation(
            format!("{name}.theta"),
            format!("{} deg is outside [0, 90)", a.theta),
        ));
    }
    Ok(())
}

/// Phase gradient that steers a wave arriving from `incident` toward
/// `reflected`: the in-plane wave-vector mismatch between the two sides.
pub fn phase_gradients(incident: Angles, reflected: Angles, cfg: &SurfaceConfig) -> Result<PhaseGradient> {
    check_direction("incidence", incident)?;
    check_direction("reflected", reflected)?;
    let (ki, kr) = (cfg.k_incident(), cfg.k_reflected());
    let (ti, pi) = (incident.theta.to_radians(), incident.phi.to_radians());
    let (tr, pr) = (reflected.theta.to_radians(), reflected.phi.to_radians());
    let gx = kr * tr.sin() * pr.cos() - ki * ti.sin() * pi.cos();
    let gy = kr * tr.sin() * pr.sin() - ki * ti.sin() * pi.sin();
    if !(gx.is_finite() && gy.is_finite()) {
        return Err(Error::validation("phase_gradient", "non-finite gradient"));
    }
    Ok(PhaseGradient { gx, gy })
}

pub fn ideal_phase(g: PhaseGradient, cfg: &SurfaceConfig) -> PhaseMatrix {
    Grid::from_fn(cfg.n_cols, cfg.n_rows, |i, j| {
        reduce_phase((g.gx * i as f64 + g.gy * j as f64) * cfg.d_u)
    })
}

/// Nearest state for `phase`, where state `k` sits at `2πk / n_states`.
/// A phase midway between two neighbouring states goes to the one below it,
/// including across the wrap (midway between the last state and 2π gives
/// the last state).
pub fn quantize_phase(phase: f64, n_states: usize) -> Result<u16> {
    if n_states < 2 {
        return Err(Error::validation("n_states", format!("{n_states} must be >= 2")));
    }
    if !phase.is_finite() {
        return Err(Error::validation("phase", "must be finite"));
    }
    Ok(quantize_unchecked(phase, n_states))
}

fn quantize_unchecked(phase: f64, n_states: usize) -> u16 {
    let units = reduce_phase(phase) / (TAU / n_states as f64);
    let below = units.floor();
    let k = if units - below > 0.5 + TIE_TOLERANCE {
        below as usize + 1
    } else {
        below as usize
    };
    (k % n_states) as u16
}

pub fn quantize_matrix(phases: &PhaseMatrix, n_states: usize) -> Result<StateMatrix> {
    if n_states < 2 {
        return Err(Error::validation("n_states", format!("{n_states} must be >= 2")));
    }
    Ok(Grid {
        n_cols: phases.n_cols,
        n_rows: phases.n_rows,
        cells: phases
            .cells
            .iter()
            .map(|&p| quantize_unchecked(p, n_states))
            .collect(),
    })
}

/// Quantized state matrix that steers `incident` toward `reflected`.
pub fn state_matrix(incident: Angles, reflected: Angles, cfg: &SurfaceConfig) -> Result<StateMatrix> {
    cfg.validate()?;
    let g = phase_gradients(incident, reflected, cfg)?;
    quantize_matrix(&ideal_phase(g, cfg), cfg.n_states)
}

/// Raised when the per-cell phase step exceeds half a cycle, so the phase
/// profile no longer samples the gradient faithfully.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AliasingWarning {
    /// Per-cell phase step along x, rad.
    pub step_x: f64,
    /// Per-cell phase step along y, rad.
    pub step_y: f64,
}

impl std::fmt::Display for AliasingWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "per-cell phase step ({:.4}, {:.4}) rad exceeds pi; steering direction is aliased",
            self.step_x, self.step_y
        )
    }
}

pub fn aliasing_check(g: PhaseGradient, cfg: &SurfaceConfig) -> Option<AliasingWarning> {
    let step_x = g.gx * cfg.d_u;
    let step_y = g.gy * cfg.d_u;
    (step_x.abs() > PI || step_y.abs() > PI).then_some(AliasingWarning { step_x, step_y })
}
