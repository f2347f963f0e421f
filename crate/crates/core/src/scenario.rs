//! Scenario configuration files.
//!
//! A scenario is one JSON object with the sections `surface`, `wave`,
//! `incidence`, `gateway`, `scenario` and `outputs`. Every key is optional
//! and falls back to the built-in defaults. Single values can be overridden
//! with dotted `section.key=value` pairs.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coding::SurfaceConfig;
use crate::error::{Error, Result};
use crate::gateway::{GatewayConfig, TraceMeta};
use crate::geometry::{Angles, CaseId, CaseParams, Trajectory};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceSection {
    pub n_cols: usize,
    pub n_rows: usize,
    pub d_u: f64,
    pub n_states: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveSection {
    pub lambda_i: f64,
    pub lambda_r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IncidenceSection {
    pub theta: f64,
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GatewaySection {
    pub angular_step: f64,
    pub sample_dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub case: CaseId,
    pub standoff_distance: f64,
    /// Defaults to walking speed for A and C, 30 m/s for B.
    pub speed: Option<f64>,
    pub start_theta: f64,
    pub launch_angle: f64,
    pub leap_interval: f64,
    pub rng_seed: u64,
    /// Defaults to the case's natural span.
    pub duration: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsSection {
    pub trace: Option<String>,
    pub report: Option<String>,
    pub heatmap: Option<String>,
    pub heatmap_format: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub surface: SurfaceSection,
    pub wave: WaveSection,
    pub incidence: IncidenceSection,
    pub gateway: GatewaySection,
    pub scenario: ScenarioSection,
    pub outputs: OutputsSection,
}

impl Default for SurfaceSection {
    fn default() -> Self {
        let s = SurfaceConfig::default();
        SurfaceSection {
            n_cols: s.n_cols,
            n_rows: s.n_rows,
            d_u: s.d_u,
            n_states: s.n_states,
        }
    }
}

impl Default for WaveSection {
    fn default() -> Self {
        let s = SurfaceConfig::default();
        WaveSection {
            lambda_i: s.lambda_i,
            lambda_r: s.lambda_r,
        }
    }
}

impl Default for IncidenceSection {
    fn default() -> Self {
        IncidenceSection { theta: 0.0, phi: 0.0 }
    }
}

impl Default for GatewaySection {
    fn default() -> Self {
        let g = GatewayConfig::default();
        GatewaySection {
            angular_step: g.angular_step,
            sample_dt: g.sample_dt,
        }
    }
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let p = CaseParams::defaults(CaseId::A);
        ScenarioSection {
            case: CaseId::A,
            standoff_distance: p.standoff_distance,
            speed: None,
            start_theta: p.start_theta,
            launch_angle: p.launch_angle,
            leap_interval: p.leap_interval,
            rng_seed: p.rng_seed,
            duration: None,
        }
    }
}

fn decode(value: Value) -> Result<ScenarioConfig> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::validation(path, e.into_inner().to_string())
    })
}

impl ScenarioConfig {
    /// Built-in defaults for `case`.
    pub fn for_case(case: CaseId) -> Self {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.case = case;
        cfg
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        decode(value)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config always serializes")
    }

    /// Applies one `section.key=value` override. The value is read as JSON
    /// when it parses as such, otherwise as a bare string.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let Some((key, raw)) = assignment.split_once('=') else {
            return Err(Error::validation(
                assignment,
                "override must have the form section.key=value",
            ));
        };
        let key = key.trim();
        let raw = raw.trim();
        let new_value = serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));

        let mut tree = serde_json::to_value(&*self).expect("config always serializes");
        let mut slot = &mut tree;
        for part in key.split('.') {
            slot = slot
                .as_object_mut()
                .and_then(|obj| obj.get_mut(part))
                .ok_or_else(|| Error::validation(key, "unknown configuration key"))?;
        }
        if slot.is_object() {
            return Err(Error::validation(key, "names a section, not a value"));
        }
        *slot = new_value;
        *self = decode(tree)?;
        Ok(())
    }

    pub fn surface_config(&self) -> SurfaceConfig {
        SurfaceConfig {
            n_cols: self.surface.n_cols,
            n_rows: self.surface.n_rows,
            d_u: self.surface.d_u,
            n_states: self.surface.n_states,
            lambda_i: self.wave.lambda_i,
            lambda_r: self.wave.lambda_r,
        }
    }

    pub fn case_params(&self) -> CaseParams {
        let s = &self.scenario;
        CaseParams {
            standoff_distance: s.standoff_distance,
            speed: s.speed.unwrap_or_else(|| CaseParams::default_speed(s.case)),
            start_theta: s.start_theta,
            launch_angle: s.launch_angle,
            leap_interval: s.leap_interval,
            rng_seed: s.rng_seed,
        }
    }

    /// Validates every section and resolves defaults into a simulation
    /// snapshot.
    pub fn build(&self) -> Result<TraceMeta> {
        let surface = self.surface_config();
        surface.validate()?;
        let gateway = GatewayConfig {
            angular_step: self.gateway.angular_step,
            sample_dt: self.gateway.sample_dt,
        };
        gateway.validate()?;
        let incident = Angles::new(self.incidence.theta, self.incidence.phi).map_err(|e| match e {
            Error::Validation { key, reason } => Error::validation(format!("incidence.{key}"), reason),
            e => e,
        })?;
        let trajectory = Trajectory::new(self.scenario.case, self.case_params(), self.scenario.duration)?;
        Ok(TraceMeta {
            surface,
            gateway,
            incident,
            trajectory,
        })
    }

    /// Config equivalent to a simulation snapshot, with every default made
    /// explicit.
    pub fn from_meta(meta: &TraceMeta, outputs: OutputsSection) -> Self {
        let s = &meta.surface;
        let p = meta.trajectory.params();
        ScenarioConfig {
            surface: SurfaceSection {
                n_cols: s.n_cols,
                n_rows: s.n_rows,
                d_u: s.d_u,
                n_states: s.n_states,
            },
            wave: WaveSection {
                lambda_i: s.lambda_i,
                lambda_r: s.lambda_r,
            },
            incidence: IncidenceSection {
                theta: meta.incident.theta,
                phi: meta.incident.phi,
            },
            gateway: GatewaySection {
                angular_step: meta.gateway.angular_step,
                sample_dt: meta.gateway.sample_dt,
            },
            scenario: ScenarioSection {
                case: meta.trajectory.case(),
                standoff_distance: p.standoff_distance,
                speed: Some(p.speed),
                start_theta: p.start_theta,
                launch_angle: p.launch_angle,
                leap_interval: p.leap_interval,
                rng_seed: p.rng_seed,
                duration: Some(meta.trajectory.duration()),
            },
            outputs,
        }
    }
}
