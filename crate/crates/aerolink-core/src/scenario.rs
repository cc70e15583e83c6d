//! End-to-end link experiments.
//!
//! A scenario wires emitters (breath/cough/sneeze schedules or on-off-keyed
//! symbol frames) through the dispersion channel into a receiver that
//! integrates, draws a noisy measurement and thresholds per window. Bit k of
//! a frame maps to an impulse release at `k·T_sym` (bit 1) or silence
//! (bit 0); the decoded stream is the per-window decision sequence, so the
//! decoded length always equals the transmitted length.
//!
//! `sync_offset` shifts the receiver's window grid relative to the
//! transmitter's symbol clock, modeling a receiver that does not know when
//! the transmitter started.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dispersion;
use crate::error::{ensure_finite, Error, Result};
use crate::grid::ConcentrationSeries;
use crate::lagrangian::{self, Boundary, StepParams};
use crate::math;
use crate::medium::{Emission, MediumParams, Point3, Probe, SourceSpec};
use crate::receiver::{self, DetectionReport, Hypotheses, ReceiverSpec, ThresholdPolicy};
use crate::rng;

/// Quadrature points per detection window when sampling the channel.
const WINDOW_SUBSAMPLES: usize = 32;

/// Quadrature points for impulse-response integrals.
const ISI_QUAD_POINTS: usize = 20_000;

/// Default breathing period: 12 breaths per minute.
pub const DEFAULT_BREATH_PERIOD: f64 = 5.0;

/// Exhalation event classes with default release strengths.
///
/// The cough scale matches the reference impulse (Q = 40 000); a quiet
/// breath carries 1% of that and a sneeze twice a cough. All of them are
/// plain defaults, overridable per event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmissionKind {
    Breath,
    Cough,
    Sneeze,
}

impl EmissionKind {
    pub fn default_q(self) -> f64 {
        match self {
            EmissionKind::Breath => 400.0,
            EmissionKind::Cough => 40_000.0,
            EmissionKind::Sneeze => 80_000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionEvent {
    pub t: f64,
    pub kind: EmissionKind,
    pub q: f64,
}

/// A time-ordered list of release events. May be empty (a silent source).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmissionSchedule {
    pub events: Vec<EmissionEvent>,
}

impl EmissionSchedule {
    pub fn new(events: Vec<EmissionEvent>) -> Result<Self> {
        let mut prev = f64::NEG_INFINITY;
        for e in &events {
            ensure_finite("event.t", e.t)?;
            ensure_finite("event.q", e.q)?;
            if e.q <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "event.q",
                    reason: "must be > 0",
                });
            }
            if e.t <= prev {
                return Err(Error::NonMonotonicTimes {
                    context: "emission schedule",
                });
            }
            prev = e.t;
        }
        Ok(Self { events })
    }

    /// Regular breathing: `n_breaths` events spaced by `period` starting at
    /// t = 0, each releasing `q` particles.
    pub fn breathing(n_breaths: usize, period: f64, q: f64) -> Result<Self> {
        if period <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "period",
                reason: "must be > 0",
            });
        }
        Self::new(
            (0..n_breaths)
                .map(|k| EmissionEvent {
                    t: k as f64 * period,
                    kind: EmissionKind::Breath,
                    q,
                })
                .collect(),
        )
    }

    pub fn last_event_time(&self) -> Option<f64> {
        self.events.last().map(|e| e.t)
    }
}

/// An on-off-keyed bit stream: bit 1 releases `q` particles at the symbol
/// start, bit 0 stays silent.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub bits: Vec<bool>,
    pub symbol_duration: f64,
    pub q: f64,
}

impl SymbolFrame {
    pub fn new(bits: Vec<bool>, symbol_duration: f64, q: f64) -> Result<Self> {
        ensure_finite("symbol_duration", symbol_duration)?;
        ensure_finite("q", q)?;
        if symbol_duration <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "symbol_duration",
                reason: "must be > 0",
            });
        }
        if q <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "q",
                reason: "must be > 0",
            });
        }
        Ok(Self {
            bits,
            symbol_duration,
            q,
        })
    }
}

/// What drives a scenario source.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceDriver {
    Schedule(EmissionSchedule),
    Frame(SymbolFrame),
}

/// A positioned emitter inside a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSource {
    pub origin: (f64, f64),
    pub height: f64,
    pub species: String,
    pub driver: SourceDriver,
}

/// Which channel model backs the scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelBackend {
    /// Closed-form puffs (the default).
    Analytic,
    /// Random-walk particles; the concentration at the receiver is a box
    /// kernel estimate of half-width `kernel_halfwidth` around the probe.
    Lagrangian {
        n_particles: usize,
        dt: f64,
        kernel_halfwidth: f64,
    },
}

/// Detection configuration for a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionSpec {
    /// Background expected count per window.
    pub lambda0: f64,
    /// Signal-present expected count; `None` calibrates it from an isolated,
    /// window-aligned symbol of the first source.
    pub lambda1: Option<f64>,
    pub policy: ThresholdPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub sources: Vec<ScenarioSource>,
    pub medium: MediumParams,
    pub receiver: ReceiverSpec,
    pub detection: DetectionSpec,
    /// Receiver window-grid shift relative to the transmitter clock, s.
    pub sync_offset: f64,
    /// Window count; defaults to the first source's frame length (or enough
    /// windows to cover its schedule). Required when there are no sources.
    pub n_windows: Option<usize>,
    pub seed: u64,
    pub backend: ChannelBackend,
    /// Optional per-event strength jitter: each event's Q is multiplied by
    /// `exp(σ·ξ − σ²/2)`, a mean-one lognormal factor.
    pub q_jitter: Option<f64>,
}

/// Everything a scenario run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub windows: Vec<DetectionReport>,
    /// Expected captured count per window (before background and noise).
    pub lambdas: Vec<f64>,
    pub decoded: Vec<bool>,
    pub transmitted: Vec<bool>,
    pub bit_errors: usize,
    pub threshold: f64,
    pub lambda1_used: f64,
    pub window_duration: f64,
    pub sync_offset: f64,
    pub isi: Option<IsiProfile>,
}

struct ExpandedEvent {
    t: f64,
    q: f64,
}

fn expand_events(
    src: &ScenarioSource,
    jitter: Option<f64>,
    seed: u64,
    source_idx: usize,
) -> Vec<ExpandedEvent> {
    let raw: Vec<(f64, f64)> = match &src.driver {
        SourceDriver::Schedule(s) => s.events.iter().map(|e| (e.t, e.q)).collect(),
        SourceDriver::Frame(f) => f
            .bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(k, _)| (k as f64 * f.symbol_duration, f.q))
            .collect(),
    };
    let mut stream = rng::stream(rng::sub_seed(seed, 0x7177), source_idx as u64);
    raw.into_iter()
        .map(|(t, q)| {
            let q = match jitter {
                Some(sigma) if sigma > 0.0 => {
                    use rand::Rng;
                    let xi: f64 = stream.sample(rand_distr::StandardNormal);
                    q * math::exp(sigma * xi - 0.5 * sigma * sigma)
                }
                _ => q,
            };
            ExpandedEvent { t, q }
        })
        .collect()
}

/// Concentration evaluator at the receiver position for the intended
/// species.
enum ChannelEval {
    Analytic(Vec<SourceSpec>),
    Sampled(ConcentrationSeries),
}

impl ChannelEval {
    fn value_at(&self, t: f64, med: &MediumParams, pos: Point3) -> Result<f64> {
        match self {
            ChannelEval::Analytic(sources) => {
                let mut c = 0.0;
                for s in sources {
                    c += dispersion::source_concentration(s, med, pos, t)?;
                }
                Ok(c)
            }
            ChannelEval::Sampled(series) => {
                // Sample times were chosen to include every quadrature point.
                let idx = series.times.partition_point(|&x| x < t - 1e-12);
                Ok(series.values[idx.min(series.values.len() - 1)])
            }
        }
    }
}

/// Runs a scenario end to end.
///
/// Per window k the receiver integrates the superposed concentration over
/// `[sync_offset + k·T, sync_offset + (k+1)·T]`, draws a measurement with
/// mean `λ₀ + λ_k` from its noise model and thresholds it. The transmitted
/// truth (for error counting) is the first source's bit stream, aligned to
/// the transmitter clock.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioResult> {
    ensure_finite("sync_offset", spec.sync_offset)?;
    ensure_finite("lambda0", spec.detection.lambda0)?;
    if spec.detection.lambda0 < 0.0 {
        return Err(Error::InvalidParameter {
            name: "lambda0",
            reason: "must be >= 0",
        });
    }
    let rx = &spec.receiver;
    let window = rx.window;

    // Window grid size.
    let n_windows = match spec.n_windows {
        Some(n) => n,
        None => match spec.sources.first() {
            Some(first) => match &first.driver {
                SourceDriver::Frame(f) => {
                    if (f.symbol_duration - window).abs() > 1e-9 * window {
                        return Err(Error::InvalidParameter {
                            name: "receiver.window",
                            reason: "must equal the frame symbol duration",
                        });
                    }
                    f.bits.len()
                }
                SourceDriver::Schedule(s) => match s.last_event_time() {
                    Some(t_last) => (math::floor(t_last / window) as usize) + 1,
                    None => 0,
                },
            },
            None => {
                return Err(Error::InvalidParameter {
                    name: "n_windows",
                    reason: "required when the scenario has no sources",
                })
            }
        },
    };

    // Intended species: the first source's. Other species are orthogonal and
    // ignored by this (single-channel) receiver.
    let intended: Option<&str> = spec.sources.first().map(|s| s.species.as_str());

    // Expand events and build the channel evaluator.
    let mut event_count = 0usize;
    let mut analytic_sources = Vec::new();
    let mut all_events: Vec<(usize, ExpandedEvent, (f64, f64), f64)> = Vec::new();
    for (idx, s) in spec.sources.iter().enumerate() {
        if Some(s.species.as_str()) != intended {
            continue;
        }
        let events = expand_events(s, spec.q_jitter, spec.seed, idx);
        event_count += events.len();
        if !events.is_empty() {
            let schedule: Vec<(f64, f64)> = events.iter().map(|e| (e.t, e.q)).collect();
            analytic_sources.push(SourceSpec::new(
                s.origin,
                s.height,
                s.species.clone(),
                Emission::Schedule(schedule),
            )?);
        }
        for e in events {
            all_events.push((idx, e, s.origin, s.height));
        }
    }

    // Quadrature sample times: windows × subsamples, end points exact.
    let mut sample_times = Vec::with_capacity(n_windows * WINDOW_SUBSAMPLES + 1);
    for k in 0..n_windows {
        for j in 0..WINDOW_SUBSAMPLES {
            sample_times
                .push(spec.sync_offset + window * (k as f64 + j as f64 / WINDOW_SUBSAMPLES as f64));
        }
    }
    sample_times.push(spec.sync_offset + window * n_windows as f64);

    let eval = match spec.backend {
        ChannelBackend::Analytic => ChannelEval::Analytic(analytic_sources),
        ChannelBackend::Lagrangian {
            n_particles,
            dt,
            kernel_halfwidth,
        } => ChannelEval::Sampled(sample_lagrangian_series(
            &all_events,
            spec,
            n_particles,
            dt,
            kernel_halfwidth,
            &sample_times,
        )?),
    };

    // Calibrated signal-present mean: an isolated symbol in its own aligned
    // window, from the first source's geometry and per-event strength.
    let lambda1 = match spec.detection.lambda1 {
        Some(l) => l,
        None => {
            let first = spec.sources.first().ok_or(Error::InvalidParameter {
                name: "lambda1",
                reason: "required when the scenario has no sources",
            })?;
            let q = match &first.driver {
                SourceDriver::Frame(f) => f.q,
                SourceDriver::Schedule(s) => {
                    s.events
                        .first()
                        .map(|e| e.q)
                        .ok_or(Error::InvalidParameter {
                            name: "lambda1",
                            reason: "cannot calibrate from an empty schedule",
                        })?
                }
            };
            let probe_src = SourceSpec::new(
                first.origin,
                first.height,
                first.species.clone(),
                Emission::Impulse { q, t0: 0.0 },
            )?;
            let series = sample_series(
                |t| dispersion::source_concentration(&probe_src, &spec.medium, rx.position, t),
                0.0,
                window,
            )?;
            spec.detection.lambda0 + receiver::expected_captured(&series, rx, 0.0)?
        }
    };
    let hyp = Hypotheses {
        lambda0: spec.detection.lambda0,
        lambda1,
    };
    let model = rx.observation_model();
    let threshold = receiver::threshold_for(spec.detection.policy, &hyp, &model)?;

    // Per-window capture, measurement and decision.
    let mut lambdas = Vec::with_capacity(n_windows);
    let mut windows = Vec::with_capacity(n_windows);
    let mut decoded = Vec::with_capacity(n_windows);
    for k in 0..n_windows {
        let start = spec.sync_offset + window * k as f64;
        let series = sample_series(
            |t| eval.value_at(t, &spec.medium, rx.position),
            start,
            window,
        )?;
        let lambda_k = receiver::expected_captured(&series, rx, start)?;
        lambdas.push(lambda_k);
        let mut draw = rng::stream(spec.seed, k as u64);
        let observed =
            receiver::sample_count(spec.detection.lambda0 + lambda_k, &model, &mut draw)?;
        let report =
            receiver::detect(observed, &hyp, ThresholdPolicy::Fixed(threshold), &model, k)?;
        decoded.push(report.decision == receiver::Decision::Present);
        windows.push(report);
    }

    // Transmitted truth on the transmitter clock.
    let transmitted: Vec<bool> = match spec.sources.first().map(|s| &s.driver) {
        Some(SourceDriver::Frame(f)) => {
            let mut bits = f.bits.clone();
            bits.resize(n_windows, false);
            bits
        }
        Some(SourceDriver::Schedule(s)) => (0..n_windows)
            .map(|k| {
                let lo = window * k as f64;
                let hi = window * (k + 1) as f64;
                s.events.iter().any(|e| e.t >= lo && e.t < hi)
            })
            .collect(),
        None => alloc::vec![false; n_windows],
    };
    let bit_errors = decoded
        .iter()
        .zip(&transmitted)
        .filter(|(d, t)| d != t)
        .count();

    // ISI profile of the single-frame-source channel, when that is what ran.
    let isi = match (spec.sources.len(), spec.sources.first().map(|s| &s.driver)) {
        (1, Some(SourceDriver::Frame(f))) if event_count > 0 => {
            let s = &spec.sources[0];
            let src = SourceSpec::new(
                s.origin,
                s.height,
                s.species.clone(),
                Emission::Impulse { q: f.q, t0: 0.0 },
            )?;
            isi_profile(&src, &spec.medium, rx.position, f.symbol_duration, None).ok()
        }
        _ => None,
    };

    Ok(ScenarioResult {
        windows,
        lambdas,
        decoded,
        transmitted,
        bit_errors,
        threshold,
        lambda1_used: lambda1,
        window_duration: window,
        sync_offset: spec.sync_offset,
        isi,
    })
}

/// Samples `f` on an evenly divided window into a series with exact
/// endpoints.
fn sample_series(
    mut f: impl FnMut(f64) -> Result<f64>,
    start: f64,
    window: f64,
) -> Result<ConcentrationSeries> {
    let n = WINDOW_SUBSAMPLES;
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let t = start + window * (j as f64 / n as f64);
        times.push(t);
        values.push(f(t)?);
    }
    ConcentrationSeries::new(times, values, "")
}

/// Runs the particle backend over every emission event and samples the box
/// kernel density at the receiver for each requested time.
fn sample_lagrangian_series(
    events: &[(usize, ExpandedEvent, (f64, f64), f64)],
    spec: &ScenarioSpec,
    n_particles: usize,
    dt: f64,
    kernel_halfwidth: f64,
    sample_times: &[f64],
) -> Result<ConcentrationSeries> {
    if dt <= 0.0 || kernel_halfwidth <= 0.0 || n_particles == 0 {
        return Err(Error::InvalidParameter {
            name: "backend",
            reason: "need n_particles >= 1, dt > 0, kernel_halfwidth > 0",
        });
    }
    let horizon = sample_times.last().copied().unwrap_or(0.0);
    let steps_per_event = math::ceil((horizon / dt).max(0.0)) as u128;
    let work = events.len() as u128 * n_particles as u128 * steps_per_event;
    if work > lagrangian::PARTICLE_STEP_CAP {
        return Err(Error::ResourceLimit {
            what: "particle-steps",
            requested: work,
            cap: lagrangian::PARTICLE_STEP_CAP,
        });
    }
    let rx = spec.receiver.position;
    let volume = {
        let side = 2.0 * kernel_halfwidth;
        side * side * side
    };
    let mut values = alloc::vec![0.0f64; sample_times.len()];
    let sp = StepParams::new(dt, spec.medium, Boundary::None)?;
    for (evt_idx, (src_idx, event, origin, height)) in events.iter().enumerate() {
        let src = SourceSpec::new(
            *origin,
            *height,
            "",
            Emission::Impulse {
                q: event.q,
                t0: event.t,
            },
        )?;
        let tag = 0x1A60_0000_0000u64 | ((*src_idx as u64) << 32) | evt_idx as u64;
        let seed = rng::sub_seed(spec.seed, tag);
        let mut ens = lagrangian::seed_ensemble(&src, n_particles, seed)?;
        let weight = ens.particle_weight();
        for (i, &ts) in sample_times.iter().enumerate() {
            if ts <= event.t {
                continue;
            }
            while ens.sim_time + dt <= ts + 1e-12 {
                ens.step(&sp)?;
            }
            let mut count = 0u64;
            for (p, alive) in ens.positions.iter().zip(&ens.alive) {
                if *alive
                    && (p.x - rx.x).abs() <= kernel_halfwidth
                    && (p.y - rx.y).abs() <= kernel_halfwidth
                    && (p.z - rx.z).abs() <= kernel_halfwidth
                {
                    count += 1;
                }
            }
            values[i] += count as f64 * weight / volume;
        }
    }
    ConcentrationSeries::new(sample_times.to_vec(), values, "")
}

/// Intersymbol-interference profile of a channel impulse response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsiProfile {
    /// Fraction of the response energy arriving after one symbol duration:
    /// `∫_{T}^{∞} h / ∫_0^{∞} h` (truncated at the horizon).
    pub tail_fraction: f64,
    /// RMS width of `h(t)` around its mean delay.
    pub delay_spread: f64,
    /// Arrival time of the response maximum.
    pub peak_time: f64,
    /// Truncation horizon actually used, s.
    pub horizon: f64,
    /// Set when no wind bounds the tail (u = 0) and the horizon is a rough
    /// diffusive estimate.
    pub horizon_warning: bool,
}

/// Computes tail fraction and delay spread for an impulse release observed
/// at `rx_pos`.
///
/// The horizon defaults to `20·d/u`; with `u = 0` a diffusive estimate
/// `100·d²/(6K)` is used and flagged.
pub fn isi_profile(
    src: &SourceSpec,
    med: &MediumParams,
    rx_pos: Point3,
    t_sym: f64,
    horizon: Option<f64>,
) -> Result<IsiProfile> {
    ensure_finite("t_sym", t_sym)?;
    if t_sym < 0.0 {
        return Err(Error::InvalidParameter {
            name: "t_sym",
            reason: "must be >= 0",
        });
    }
    let (q, t0) = match src.emission {
        Emission::Impulse { q, t0 } => (q, t0),
        _ => {
            return Err(Error::InvalidParameter {
                name: "src",
                reason: "isi_profile requires an impulse source",
            })
        }
    };
    let _ = q;
    let dx = rx_pos.x - src.origin.0;
    let dy = rx_pos.y - src.origin.1;
    let dz = rx_pos.z - src.height;
    let d = math::sqrt(dx * dx + dy * dy + dz * dz);
    if d == 0.0 {
        return Err(Error::InvalidParameter {
            name: "rx_pos",
            reason: "probe must not coincide with the source (response not integrable)",
        });
    }
    let mut horizon_warning = false;
    let horizon = match horizon {
        Some(h) => {
            if h.is_nan() || h <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "horizon",
                    reason: "must be > 0",
                });
            }
            h
        }
        None if med.wind_u > 0.0 => 20.0 * d / med.wind_u,
        None => {
            // Pure diffusion: the response peaks at d²/(6K) and decays only
            // algebraically, so any finite horizon truncates real mass.
            horizon_warning = true;
            100.0 * d * d / (6.0 * med.diffusivity_k)
        }
    };

    let n = ISI_QUAD_POINTS;
    let step = horizon / n as f64;
    // h(0+) → 0 at any probe away from the source.
    let mut prev = 0.0f64;
    let mut total = 0.0f64;
    let mut m1 = 0.0f64;
    let mut m2 = 0.0f64;
    let mut tail = 0.0f64;
    let mut peak_val = 0.0f64;
    let mut peak_time = 0.0f64;
    let mut prev_t = 0.0f64;
    for i in 1..=n {
        let t = step * i as f64;
        let h = dispersion::puff_concentration(src, med, rx_pos, t0 + t)?;
        let seg = 0.5 * (prev + h) * (t - prev_t);
        total += seg;
        m1 += 0.5 * (prev * prev_t + h * t) * (t - prev_t);
        m2 += 0.5 * (prev * prev_t * prev_t + h * t * t) * (t - prev_t);
        if t > t_sym {
            // Segments fully past T count whole; the straddling segment
            // contributes its fraction beyond T.
            let inside = if prev_t >= t_sym {
                seg
            } else {
                let f = (t - t_sym) / (t - prev_t);
                seg * f
            };
            tail += inside;
        }
        if h > peak_val {
            peak_val = h;
            peak_time = t;
        }
        prev = h;
        prev_t = t;
    }
    if total <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "isi",
            reason: "impulse response integrates to zero over the horizon",
        });
    }
    let mean = m1 / total;
    let var = (m2 / total - mean * mean).max(0.0);
    let tail_fraction = if t_sym == 0.0 {
        1.0
    } else {
        (tail / total).clamp(0.0, 1.0)
    };
    Ok(IsiProfile {
        tail_fraction,
        delay_spread: math::sqrt(var),
        peak_time,
        horizon,
        horizon_warning,
    })
}

/// One row of an interference sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceRow {
    pub separation: f64,
    /// Expected capture from the intended source alone.
    pub lambda_signal: f64,
    /// Expected capture from the interferer at this separation.
    pub lambda_interference: f64,
    pub threshold: f64,
    pub p_fa: f64,
    pub p_md: f64,
}

/// Sweeps a same-species interferer's crosswind separation and reports the
/// detection operating point at each distance.
///
/// Both sources fire an impulse at t = 0; the receiver window is
/// `[0, rx.window]`. The null hypothesis absorbs the interferer
/// (`λ₀' = λ₀ + λ_int`), so the threshold adapts per row; trends are
/// reported, not asserted.
pub fn interference_sweep(
    src: &SourceSpec,
    separations: &[f64],
    med: &MediumParams,
    rx: &ReceiverSpec,
    lambda0: f64,
    policy: ThresholdPolicy,
) -> Result<Vec<InterferenceRow>> {
    let capture = |origin: (f64, f64)| -> Result<f64> {
        let moved = SourceSpec::new(
            origin,
            src.height,
            src.species.clone(),
            src.emission.clone(),
        )?;
        let series = sample_series(
            |t| dispersion::source_concentration(&moved, med, rx.position, t),
            0.0,
            rx.window,
        )?;
        receiver::expected_captured(&series, rx, 0.0)
    };
    let lambda_signal = capture(src.origin)?;
    let model = rx.observation_model();
    let mut rows = Vec::with_capacity(separations.len());
    for &sep in separations {
        ensure_finite("separation", sep)?;
        let lambda_int = capture((src.origin.0, src.origin.1 + sep))?;
        let hyp = Hypotheses {
            lambda0: lambda0 + lambda_int,
            lambda1: lambda0 + lambda_int + lambda_signal,
        };
        let threshold = receiver::threshold_for(policy, &hyp, &model)?;
        let p_fa = match model {
            receiver::ObservationModel::Poisson => {
                receiver::poisson_tail_ge(hyp.lambda0, threshold)
            }
            _ => receiver::detect(0.0, &hyp, ThresholdPolicy::Fixed(threshold), &model, 0)?.p_fa,
        };
        let p_md = receiver::detect(0.0, &hyp, ThresholdPolicy::Fixed(threshold), &model, 0)?.p_md;
        rows.push(InterferenceRow {
            separation: sep,
            lambda_signal,
            lambda_interference: lambda_int,
            threshold,
            p_fa,
            p_md,
        });
    }
    Ok(rows)
}

/// A source whose position is piecewise constant in time.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackPoint {
    pub t: f64,
    pub origin: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackedSource {
    pub height: f64,
    pub species: String,
    /// Position segments; point i holds from `track[i].t` until the next
    /// point (the last segment extends forever).
    pub track: Vec<TrackPoint>,
    pub events: EmissionSchedule,
}

impl TrackedSource {
    fn position_at(&self, t: f64) -> Result<(f64, f64)> {
        let first = self.track.first().ok_or(Error::InvalidParameter {
            name: "track",
            reason: "must contain at least one point",
        })?;
        if t < first.t {
            return Err(Error::TrackCoverage { t });
        }
        let idx = self.track.partition_point(|p| p.t <= t);
        Ok(self.track[idx - 1].origin)
    }
}

/// Concentration series at the probe from a mobile source: each emission
/// event releases a puff anchored at the source position at that instant
/// (quasi-static approximation).
pub fn mobility_track(
    src: &TrackedSource,
    med: &MediumParams,
    probe: &Probe,
) -> Result<ConcentrationSeries> {
    let mut prev = f64::NEG_INFINITY;
    for p in &src.track {
        ensure_finite("track.t", p.t)?;
        if p.t <= prev {
            return Err(Error::NonMonotonicTimes {
                context: "position track",
            });
        }
        prev = p.t;
    }
    // Anchor every event at the position held when it fired.
    let mut anchored = Vec::with_capacity(src.events.events.len());
    for e in &src.events.events {
        let origin = src.position_at(e.t)?;
        anchored.push(SourceSpec::new(
            origin,
            src.height,
            src.species.clone(),
            Emission::Impulse { q: e.q, t0: e.t },
        )?);
    }
    let mut values = Vec::with_capacity(probe.sample_times.len());
    for &t in &probe.sample_times {
        let mut c = 0.0;
        for s in &anchored {
            c += dispersion::source_concentration(s, med, probe.position, t)?;
        }
        values.push(c);
    }
    ConcentrationSeries::new(probe.sample_times.clone(), values, src.species.clone())
}
