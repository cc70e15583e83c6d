//! JSON-facing configuration types.
//!
//! These mirror the library's domain types with a stable, documented schema
//! (unknown keys are rejected). Command-line flags override file values; the
//! effective configuration can be echoed back with `--dump-config` and
//! re-parsed into the same structure.

use serde::{Deserialize, Serialize};

use aerolink_core::medium::{MediumParams, Point3};
use aerolink_core::receiver::{NoiseKind, ReceiverSpec, ThresholdPolicy};
use aerolink_core::scenario::{
    ChannelBackend, DetectionSpec, EmissionEvent, EmissionKind, EmissionSchedule, ScenarioSource,
    ScenarioSpec, SourceDriver, SymbolFrame,
};

use crate::error::CliError;

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub wind_u: f64,
    pub diffusivity_k: f64,
    #[serde(default)]
    pub reflect_ground: bool,
}

impl MediumConfig {
    pub fn build(&self) -> Result<MediumParams, CliError> {
        MediumParams::new(self.wind_u, self.diffusivity_k, self.reflect_ground)
            .map_err(CliError::config)
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseConfig {
    Poisson,
    Gaussian { sigma: f64 },
}

impl NoiseConfig {
    fn to_kind(&self) -> NoiseKind {
        match self {
            NoiseConfig::Poisson => NoiseKind::Poisson,
            NoiseConfig::Gaussian { sigma } => NoiseKind::Gaussian { sigma: *sigma },
        }
    }
}

fn default_gain() -> f64 {
    1.0
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReceiverConfig {
    /// `[x, y, z]` in meters.
    pub position: [f64; 3],
    pub intake_rate: f64,
    pub window: f64,
    pub efficiency: f64,
    #[serde(default = "default_gain")]
    pub gain: f64,
    pub noise: NoiseConfig,
}

impl ReceiverConfig {
    pub fn build(&self) -> Result<ReceiverSpec, CliError> {
        ReceiverSpec::new(
            Point3::new(self.position[0], self.position[1], self.position[2]),
            self.intake_rate,
            self.window,
            self.efficiency,
            self.gain,
            self.noise.to_kind(),
        )
        .map_err(CliError::config)
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyConfig {
    Fixed(f64),
    TargetFalseAlarm(f64),
}

impl PolicyConfig {
    pub fn to_policy(self) -> ThresholdPolicy {
        match self {
            PolicyConfig::Fixed(tau) => ThresholdPolicy::Fixed(tau),
            PolicyConfig::TargetFalseAlarm(a) => ThresholdPolicy::TargetFalseAlarm(a),
        }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    pub lambda0: f64,
    #[serde(default)]
    pub lambda1: Option<f64>,
    pub policy: PolicyConfig,
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum KindConfig {
    Breath,
    Cough,
    Sneeze,
}

impl KindConfig {
    fn to_kind(self) -> EmissionKind {
        match self {
            KindConfig::Breath => EmissionKind::Breath,
            KindConfig::Cough => EmissionKind::Cough,
            KindConfig::Sneeze => EmissionKind::Sneeze,
        }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EventConfig {
    pub t: f64,
    pub kind: KindConfig,
    /// Released particles; defaults to the kind's preset strength.
    #[serde(default)]
    pub q: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DriverConfig {
    /// On-off keying: `bits` is a string of '0'/'1'.
    Frame {
        bits: String,
        symbol_duration: f64,
        q: f64,
    },
    Schedule {
        events: Vec<EventConfig>,
    },
}

fn default_height() -> f64 {
    aerolink_core::medium::DEFAULT_SOURCE_HEIGHT_M
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub origin: [f64; 2],
    #[serde(default = "default_height")]
    pub height: f64,
    pub species: String,
    pub driver: DriverConfig,
}

impl SourceConfig {
    pub fn build(&self) -> Result<ScenarioSource, CliError> {
        let driver = match &self.driver {
            DriverConfig::Frame {
                bits,
                symbol_duration,
                q,
            } => {
                let parsed: Result<Vec<bool>, CliError> = bits
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(CliError::Config(format!(
                            "invalid bit character `{other}` in frame bits"
                        ))),
                    })
                    .collect();
                SourceDriver::Frame(
                    SymbolFrame::new(parsed?, *symbol_duration, *q).map_err(CliError::config)?,
                )
            }
            DriverConfig::Schedule { events } => {
                let events: Vec<EmissionEvent> = events
                    .iter()
                    .map(|e| EmissionEvent {
                        t: e.t,
                        kind: e.kind.to_kind(),
                        q: e.q.unwrap_or_else(|| e.kind.to_kind().default_q()),
                    })
                    .collect();
                SourceDriver::Schedule(EmissionSchedule::new(events).map_err(CliError::config)?)
            }
        };
        Ok(ScenarioSource {
            origin: (self.origin[0], self.origin[1]),
            height: self.height,
            species: self.species.clone(),
            driver,
        })
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendConfig {
    #[default]
    Analytic,
    Lagrangian {
        n_particles: usize,
        dt: f64,
        kernel_halfwidth: f64,
    },
}

impl BackendConfig {
    fn to_backend(self) -> ChannelBackend {
        match self {
            BackendConfig::Analytic => ChannelBackend::Analytic,
            BackendConfig::Lagrangian {
                n_particles,
                dt,
                kernel_halfwidth,
            } => ChannelBackend::Lagrangian {
                n_particles,
                dt,
                kernel_halfwidth,
            },
        }
    }
}

/// The scenario file format.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub medium: MediumConfig,
    pub receiver: ReceiverConfig,
    pub detection: DetectionConfig,
    #[serde(default)]
    pub sources: Vec<SourceConfig>,
    #[serde(default)]
    pub sync_offset: f64,
    #[serde(default)]
    pub n_windows: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub q_jitter: Option<f64>,
}

impl ScenarioConfig {
    pub fn build(&self, seed: u64) -> Result<ScenarioSpec, CliError> {
        Ok(ScenarioSpec {
            sources: self
                .sources
                .iter()
                .map(|s| s.build())
                .collect::<Result<_, _>>()?,
            medium: self.medium.build()?,
            receiver: self.receiver.build()?,
            detection: DetectionSpec {
                lambda0: self.detection.lambda0,
                lambda1: self.detection.lambda1,
                policy: self.detection.policy.to_policy(),
            },
            sync_offset: self.sync_offset,
            n_windows: self.n_windows,
            seed,
            backend: self.backend.to_backend(),
            q_jitter: self.q_jitter,
        })
    }
}

// Per-command effective configurations, echoed by --dump-config.

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(tag = "command", rename_all = "snake_case", deny_unknown_fields)]
pub enum RunConfig {
    Puff(PuffConfig),
    Plume(PlumeConfig),
    Lagrangian(LagrangianConfig),
    Euler(EulerConfig),
    Detect(DetectConfig),
    Roc(RocConfig),
    Scenario(ScenarioRun),
    Compare(CompareConfig),
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PuffConfig {
    pub q: f64,
    pub medium: MediumConfig,
    pub height: f64,
    pub times: Vec<f64>,
    pub plane_z: f64,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub dx: f64,
    pub pgm: bool,
    pub probe: Option<[f64; 3]>,
    pub probe_dt: f64,
    pub probe_t_end: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PlumeConfig {
    pub qdot: f64,
    pub medium: MediumConfig,
    pub height: f64,
    pub plane_z: f64,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub dx: f64,
    pub pgm: bool,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LagrangianConfig {
    pub q: f64,
    pub medium: MediumConfig,
    pub height: f64,
    pub n_particles: usize,
    pub dt: f64,
    pub t_end: f64,
    pub boundary: String,
    pub bin: f64,
    pub seed: u64,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EulerConfig {
    pub q: f64,
    pub medium: MediumConfig,
    pub height: f64,
    pub dx: f64,
    pub dt: Option<f64>,
    pub t0: f64,
    pub t_end: f64,
    pub boundary: String,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DetectConfig {
    pub lambda0: f64,
    pub lambda1: f64,
    pub policy: PolicyConfig,
    pub noise: NoiseConfig,
    pub gain: f64,
    pub observation: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RocConfig {
    pub lambda0: f64,
    pub lambda1: f64,
    pub noise: NoiseConfig,
    pub gain: f64,
    pub taus: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    #[serde(flatten)]
    pub scenario: ScenarioConfig,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub q: f64,
    pub medium: MediumConfig,
    pub height: f64,
    pub t0: f64,
    pub t_end: f64,
    pub n_particles: usize,
    pub lagrangian_dt: f64,
    pub euler_dx: f64,
    pub bin: f64,
    pub mask_fraction: f64,
    pub seed: u64,
}
