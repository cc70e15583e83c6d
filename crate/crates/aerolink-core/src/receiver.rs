//! The machine side of the link: air sampling, noisy sensing and detection.
//!
//! Reception happens in three stages. The sampler draws air at `intake_rate`
//! through a collector of efficiency `η`, so over a window the expected
//! captured count is `λ = η · intake_rate · ∫ C(t) dt`. The biosensor turns
//! bound particles into a measurement: either a direct Poisson count with
//! mean `λ` (binding events are a counting process) or, for high-count
//! regimes, a Gaussian statistic `λ·g + N(0, σ²)` with sensor gain `g`.
//! A threshold test then declares the source present or absent, with exact
//! tail probabilities for the configured hypotheses:
//! false alarm `p_fa = P(obs ≥ τ | λ₀)`, miss `p_md = P(obs < τ | λ₁)`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rand_pcg::Pcg64Mcg;

use crate::error::{ensure_finite, Error, Result};
use crate::grid::ConcentrationSeries;
use crate::math;
use crate::medium::Point3;

/// Measurement noise at the biosensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    /// Integer counting channel, `obs ~ Poisson(λ)`.
    Poisson,
    /// Real-valued statistic, `obs = λ·gain + N(0, σ²)`.
    Gaussian { sigma: f64 },
}

/// A stationary sampling/sensing unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverSpec {
    pub position: Point3,
    /// Sampled air volume per second, m³/s.
    pub intake_rate: f64,
    /// Observation window length, s.
    pub window: f64,
    /// Sampler collection efficiency η ∈ [0, 1]; 0.85 is a sensible
    /// default for electrostatic-precipitation samplers.
    pub efficiency: f64,
    /// Sensor signal units per bound particle (Gaussian mode only).
    pub gain: f64,
    pub noise: NoiseKind,
}

impl ReceiverSpec {
    pub fn new(
        position: Point3,
        intake_rate: f64,
        window: f64,
        efficiency: f64,
        gain: f64,
        noise: NoiseKind,
    ) -> Result<Self> {
        ensure_finite("intake_rate", intake_rate)?;
        ensure_finite("window", window)?;
        ensure_finite("efficiency", efficiency)?;
        ensure_finite("gain", gain)?;
        if intake_rate <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "intake_rate",
                reason: "must be > 0",
            });
        }
        if window <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "window",
                reason: "must be > 0",
            });
        }
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::InvalidParameter {
                name: "efficiency",
                reason: "must lie in [0, 1]",
            });
        }
        if let NoiseKind::Gaussian { sigma } = noise {
            ensure_finite("sigma", sigma)?;
            if sigma < 0.0 {
                return Err(Error::InvalidParameter {
                    name: "sigma",
                    reason: "must be >= 0",
                });
            }
        }
        Ok(Self {
            position,
            intake_rate,
            window,
            efficiency,
            gain,
            noise,
        })
    }

    /// The measurement model induced by this receiver.
    pub fn observation_model(&self) -> ObservationModel {
        match self.noise {
            NoiseKind::Poisson => ObservationModel::Poisson,
            NoiseKind::Gaussian { sigma } => ObservationModel::Gaussian {
                gain: self.gain,
                sigma,
            },
        }
    }
}

/// The measurement model used by the detector math.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservationModel {
    Poisson,
    Gaussian { gain: f64, sigma: f64 },
}

/// Background (`lambda0`) and signal-present (`lambda1`) expected counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hypotheses {
    pub lambda0: f64,
    pub lambda1: f64,
}

impl Hypotheses {
    pub fn check(&self) -> Result<()> {
        ensure_finite("lambda0", self.lambda0)?;
        ensure_finite("lambda1", self.lambda1)?;
        if self.lambda0 < 0.0 || self.lambda1 <= self.lambda0 {
            return Err(Error::DegenerateHypotheses {
                lambda0: self.lambda0,
                lambda1: self.lambda1,
            });
        }
        Ok(())
    }
}

/// How the decision threshold is chosen.
///
/// The count threshold is the Neyman–Pearson test here: the likelihood ratio
/// is monotone in the count for Poisson (and in the statistic for Gaussian),
/// so "declare present iff obs ≥ τ" is optimal for any target false-alarm
/// rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdPolicy {
    Fixed(f64),
    /// Smallest τ whose false-alarm probability does not exceed the target.
    TargetFalseAlarm(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Present,
    Absent,
}

/// Outcome of one detection window.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub window_id: usize,
    pub observed: f64,
    pub threshold: f64,
    pub decision: Decision,
    /// P(declare present | background only), exact for the model.
    pub p_fa: f64,
    /// P(declare absent | signal present), exact for the model.
    pub p_md: f64,
}

// ---------------------------------------------------------------------------
// Exact Poisson tails
// ---------------------------------------------------------------------------

/// ln P(X = k) for X ~ Poisson(lambda), lambda > 0.
fn poisson_ln_pmf(lambda: f64, k: u64) -> f64 {
    k as f64 * math::ln(lambda) - lambda - math::ln_gamma(k as f64 + 1.0)
}

/// Σ_{k = k_lo}^{∞} pmf(k), summed upward from the first term.
fn upper_sum(lambda: f64, k_lo: u64) -> f64 {
    let mut term = math::exp(poisson_ln_pmf(lambda, k_lo));
    let mut acc = term;
    let mut k = k_lo;
    loop {
        k += 1;
        term *= lambda / k as f64;
        acc += term;
        if term <= acc * 1e-18 || term == 0.0 {
            break;
        }
    }
    acc
}

/// Σ_{k = 0}^{k_hi} pmf(k), summed downward from the largest term.
fn lower_sum(lambda: f64, k_hi: u64) -> f64 {
    let mut term = math::exp(poisson_ln_pmf(lambda, k_hi));
    let mut acc = term;
    let mut k = k_hi;
    while k > 0 {
        term *= k as f64 / lambda;
        acc += term;
        k -= 1;
        if term <= acc * 1e-18 || term == 0.0 {
            break;
        }
    }
    acc
}

/// Exact `P(X ≥ tau)` for `X ~ Poisson(lambda)`; the decision rule treats a
/// real-valued τ as `count ≥ ⌈τ⌉`.
pub fn poisson_tail_ge(lambda: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        return 1.0;
    }
    let k0 = math::ceil(tau) as u64;
    if lambda == 0.0 {
        return 0.0;
    }
    if (k0 as f64) > lambda {
        // The upper tail is the small side: sum it directly.
        upper_sum(lambda, k0)
    } else {
        (1.0 - lower_sum(lambda, k0 - 1)).max(0.0)
    }
}

/// Exact `P(X < tau)` = `P(X ≤ ⌈τ⌉ − 1)`.
pub fn poisson_cdf_below(lambda: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        return 0.0;
    }
    let k0 = math::ceil(tau) as u64;
    if lambda == 0.0 {
        return 1.0;
    }
    if (k0 as f64) <= lambda {
        // The lower tail is the small side: sum it directly.
        lower_sum(lambda, k0 - 1)
    } else {
        (1.0 - upper_sum(lambda, k0)).max(0.0)
    }
}

/// Standard normal upper tail `P(Z ≥ z)`.
fn normal_tail(z: f64) -> f64 {
    0.5 * math::erfc(z / core::f64::consts::SQRT_2)
}

fn model_tails(model: &ObservationModel, hyp: &Hypotheses, tau: f64) -> (f64, f64) {
    match *model {
        ObservationModel::Poisson => (
            poisson_tail_ge(hyp.lambda0, tau),
            poisson_cdf_below(hyp.lambda1, tau),
        ),
        ObservationModel::Gaussian { gain, sigma } => {
            if sigma == 0.0 {
                let p_fa = if hyp.lambda0 * gain >= tau { 1.0 } else { 0.0 };
                let p_md = if hyp.lambda1 * gain < tau { 1.0 } else { 0.0 };
                (p_fa, p_md)
            } else {
                (
                    normal_tail((tau - hyp.lambda0 * gain) / sigma),
                    1.0 - normal_tail((tau - hyp.lambda1 * gain) / sigma),
                )
            }
        }
    }
}

/// Resolves a threshold policy for the given hypotheses and model.
pub fn threshold_for(
    policy: ThresholdPolicy,
    hyp: &Hypotheses,
    model: &ObservationModel,
) -> Result<f64> {
    hyp.check()?;
    match policy {
        ThresholdPolicy::Fixed(tau) => {
            ensure_finite("tau", tau)?;
            Ok(tau)
        }
        ThresholdPolicy::TargetFalseAlarm(alpha) => {
            ensure_finite("target_p_fa", alpha)?;
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::InvalidParameter {
                    name: "target_p_fa",
                    reason: "must lie in [0, 1]",
                });
            }
            match *model {
                ObservationModel::Poisson => {
                    let mut k = 0u64;
                    // Bound: λ0 + 40σ + 50 always drives the tail below any
                    // representable α.
                    let cap =
                        (hyp.lambda0 + 40.0 * math::sqrt(hyp.lambda0 + 1.0) + 50.0) as u64 + 1;
                    while k <= cap {
                        if poisson_tail_ge(hyp.lambda0, k as f64) <= alpha {
                            return Ok(k as f64);
                        }
                        k += 1;
                    }
                    Ok(cap as f64)
                }
                ObservationModel::Gaussian { gain, sigma } => {
                    if sigma == 0.0 {
                        // Deterministic statistic: any τ between the two
                        // means separates the hypotheses perfectly.
                        return Ok(0.5 * (hyp.lambda0 + hyp.lambda1) * gain);
                    }
                    // Bisect the monotone tail for z with Q(z) = alpha.
                    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if normal_tail(mid) > alpha {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    Ok(hyp.lambda0 * gain + sigma * hi)
                }
            }
        }
    }
}

/// Expected captured particle count over the window starting at
/// `window_start`: `λ = η · intake_rate · ∫ C dt` by trapezoidal quadrature
/// on the series samples.
pub fn expected_captured(
    series: &ConcentrationSeries,
    rx: &ReceiverSpec,
    window_start: f64,
) -> Result<f64> {
    let integral = series.integrate(window_start, window_start + rx.window)?;
    Ok(rx.efficiency * rx.intake_rate * integral)
}

/// Draws one measurement for expected count `lambda`.
///
/// Poisson mode returns an integer count (as f64); Gaussian mode returns
/// `λ·gain + σ·ξ`. `λ = 0` under Poisson is always 0.
pub fn sample_count(lambda: f64, model: &ObservationModel, rng: &mut Pcg64Mcg) -> Result<f64> {
    ensure_finite("lambda", lambda)?;
    if lambda < 0.0 {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: "must be >= 0",
        });
    }
    match *model {
        ObservationModel::Poisson => {
            if lambda == 0.0 {
                return Ok(0.0);
            }
            let dist = Poisson::new(lambda).map_err(|_| Error::InvalidParameter {
                name: "lambda",
                reason: "not a valid Poisson mean",
            })?;
            Ok(dist.sample(rng))
        }
        ObservationModel::Gaussian { gain, sigma } => {
            let xi: f64 = rng.sample(StandardNormal);
            Ok(lambda * gain + sigma * xi)
        }
    }
}

/// Threshold test: declare present iff `observed ≥ τ`.
///
/// The report carries the exact tail probabilities of the configured
/// hypotheses, not empirical rates.
pub fn detect(
    observed: f64,
    hyp: &Hypotheses,
    policy: ThresholdPolicy,
    model: &ObservationModel,
    window_id: usize,
) -> Result<DetectionReport> {
    hyp.check()?;
    ensure_finite("observed", observed)?;
    let tau = threshold_for(policy, hyp, model)?;
    let (p_fa, p_md) = model_tails(model, hyp, tau);
    Ok(DetectionReport {
        window_id,
        observed,
        threshold: tau,
        decision: if observed >= tau {
            Decision::Present
        } else {
            Decision::Absent
        },
        p_fa,
        p_md,
    })
}

/// One point of a receiver operating characteristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub tau: f64,
    pub p_fa: f64,
    pub p_detect: f64,
}

/// Sweeps the threshold and reports `(p_fa, p_detect)` pairs.
///
/// With `taus = None`, Poisson sweeps the integers from 0 until both tails
/// are negligible and Gaussian sweeps `[λ₀g − 8σ, λ₁g + 8σ]`; the endpoints
/// `(1, 1)` and `(→0, →0)` are always included.
pub fn roc_curve(
    hyp: &Hypotheses,
    model: &ObservationModel,
    taus: Option<&[f64]>,
) -> Result<Vec<RocPoint>> {
    hyp.check()?;
    let sweep: Vec<f64> = match taus {
        Some(t) => t.to_vec(),
        None => match *model {
            ObservationModel::Poisson => {
                let mut k_end = 1u64;
                while poisson_tail_ge(hyp.lambda1, k_end as f64) > 1e-9 && k_end < 100_000 {
                    k_end += 1;
                }
                (0..=k_end).map(|k| k as f64).collect()
            }
            ObservationModel::Gaussian { gain, sigma } => {
                let lo = hyp.lambda0 * gain - 8.0 * sigma;
                let hi = hyp.lambda1 * gain + 8.0 * sigma;
                let n = 400usize;
                (0..=n)
                    .map(|i| lo + (hi - lo) * i as f64 / n as f64)
                    .collect()
            }
        },
    };
    Ok(sweep
        .into_iter()
        .map(|tau| {
            let (p_fa, p_md) = model_tails(model, hyp, tau);
            RocPoint {
                tau,
                p_fa,
                p_detect: 1.0 - p_md,
            }
        })
        .collect())
}

/// Per-species detection configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesDetector {
    pub hypotheses: Hypotheses,
    pub policy: ThresholdPolicy,
}

/// Decides each species independently.
///
/// The observation and configuration key sets must match exactly (a missing
/// or extra key is a configuration error). A species whose hypotheses are
/// degenerate yields an error entry without failing the others.
pub fn multi_species_detect(
    observations: &BTreeMap<String, f64>,
    detectors: &BTreeMap<String, SpeciesDetector>,
    model: &ObservationModel,
) -> Result<BTreeMap<String, Result<DetectionReport>>> {
    for key in observations.keys() {
        if !detectors.contains_key(key) {
            return Err(Error::UnknownSpecies(key.clone()));
        }
    }
    for key in detectors.keys() {
        if !observations.contains_key(key) {
            return Err(Error::UnknownSpecies(key.clone()));
        }
    }
    let mut out = BTreeMap::new();
    for (key, det) in detectors {
        let obs = observations[key];
        out.insert(
            key.clone(),
            detect(obs, &det.hypotheses, det.policy, model, 0),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::puff_concentration;
    use crate::medium::{MediumParams, SourceSpec};
    use crate::rng::stream;

    fn basic_rx(noise: NoiseKind) -> ReceiverSpec {
        ReceiverSpec::new(Point3::new(1.0, 0.0, 1.7), 1e-3, 10.0, 0.85, 1.0, noise).unwrap()
    }

    #[test]
    fn constant_series_capture() {
        // C = 1000/m³ for 10 s at 1e-3 m³/s and η = 0.85: λ = 8.5.
        let series =
            ConcentrationSeries::new(vec![0.0, 5.0, 10.0], vec![1000.0, 1000.0, 1000.0], "flu")
                .unwrap();
        let rx = basic_rx(NoiseKind::Poisson);
        let lambda = expected_captured(&series, &rx, 0.0).unwrap();
        assert!((lambda - 8.5).abs() < 1e-12);

        // η = 0 kills the capture entirely.
        let dead =
            ReceiverSpec::new(rx.position, 1e-3, 10.0, 0.0, 1.0, NoiseKind::Poisson).unwrap();
        assert_eq!(expected_captured(&series, &dead, 0.0).unwrap(), 0.0);

        // Window beyond the series span is a coverage error.
        assert!(matches!(
            expected_captured(&series, &rx, 5.0),
            Err(Error::WindowNotCovered { .. })
        ));
    }

    #[test]
    fn efficiency_range_brackets_capture() {
        let series = ConcentrationSeries::new(vec![0.0, 1.0], vec![500.0, 700.0], "flu").unwrap();
        let lam = |eta: f64| {
            let rx = ReceiverSpec::new(
                Point3::new(0.0, 0.0, 0.0),
                2e-3,
                1.0,
                eta,
                1.0,
                NoiseKind::Poisson,
            )
            .unwrap();
            expected_captured(&series, &rx, 0.0).unwrap()
        };
        let (lo, hi) = (lam(0.8), lam(0.9));
        for eta in [0.8, 0.82, 0.85, 0.88, 0.9] {
            let l = lam(eta);
            assert!(l >= lo && l <= hi);
        }
    }

    #[test]
    fn capture_is_linear_in_concentration() {
        let series =
            ConcentrationSeries::new(vec![0.0, 1.0, 2.0], vec![1.0, 4.0, 2.0], "flu").unwrap();
        let doubled =
            ConcentrationSeries::new(vec![0.0, 1.0, 2.0], vec![2.0, 8.0, 4.0], "flu").unwrap();
        let rx = ReceiverSpec::new(
            Point3::new(0.0, 0.0, 0.0),
            1e-3,
            2.0,
            0.85,
            1.0,
            NoiseKind::Poisson,
        )
        .unwrap();
        let a = expected_captured(&series, &rx, 0.0).unwrap();
        let b = expected_captured(&doubled, &rx, 0.0).unwrap();
        assert_eq!(b, 2.0 * a);
    }

    #[test]
    fn golden_capture_from_impulse_response() {
        // Reference channel at probe (1, 0, H), window [0, 3] s, η = 0.85,
        // intake 1e-3 m³/s. Quadrature oracle: λ = 90.18775; a 4x finer
        // sampling must agree to 0.1%.
        let src = SourceSpec::impulse_at((0.0, 0.0), 1.7, "flu", 40_000.0).unwrap();
        let med = MediumParams::new(1.0, 0.03, false).unwrap();
        let p = Point3::new(1.0, 0.0, 1.7);
        let sample = |n: usize| {
            let mut times = Vec::with_capacity(n + 1);
            let mut values = Vec::with_capacity(n + 1);
            for i in 0..=n {
                let t = 3.0 * i as f64 / n as f64;
                times.push(t);
                values.push(if t == 0.0 {
                    0.0
                } else {
                    puff_concentration(&src, &med, p, t).unwrap()
                });
            }
            ConcentrationSeries::new(times, values, "flu").unwrap()
        };
        let rx = ReceiverSpec::new(p, 1e-3, 3.0, 0.85, 1.0, NoiseKind::Poisson).unwrap();
        let coarse = expected_captured(&sample(3000), &rx, 0.0).unwrap();
        let fine = expected_captured(&sample(12_000), &rx, 0.0).unwrap();
        assert!((coarse - fine).abs() / fine < 1e-3, "{coarse} vs {fine}");
        assert!((fine - 90.18775).abs() < 0.001, "lambda {fine}");
    }

    #[test]
    fn poisson_tails_reference_values() {
        // Exact tail sums for the detection grid.
        assert!((poisson_tail_ge(2.0, 6.0) - 0.016_563_608_5).abs() < 1e-9);
        assert!((poisson_cdf_below(10.0, 6.0) - 0.067_085_962_9).abs() < 1e-9);
        assert!((poisson_tail_ge(1.0, 3.0) - 0.080_301_397_1).abs() < 1e-9);
        assert!((poisson_cdf_below(5.0, 3.0) - 0.124_652_019_5).abs() < 1e-9);
        assert!((poisson_tail_ge(5.0, 12.0) - 0.005_453_091_9).abs() < 1e-9);
        assert!((poisson_cdf_below(20.0, 12.0) - 0.021_386_821_6).abs() < 1e-9);
        // Degenerate corners.
        assert_eq!(poisson_tail_ge(2.0, 0.0), 1.0);
        assert_eq!(poisson_cdf_below(2.0, 0.0), 0.0);
        assert_eq!(poisson_tail_ge(0.0, 1.0), 0.0);
        assert_eq!(poisson_cdf_below(0.0, 1.0), 1.0);
        // Complements agree.
        for (lam, tau) in [(2.0, 6.0), (10.0, 6.0), (100.0, 80.0), (3.0, 30.0)] {
            let s = poisson_tail_ge(lam, tau) + poisson_cdf_below(lam, tau);
            assert!((s - 1.0).abs() < 1e-12, "lam={lam} tau={tau}: {s}");
        }
    }

    #[test]
    fn detect_reference_point() {
        let hyp = Hypotheses {
            lambda0: 2.0,
            lambda1: 10.0,
        };
        let report = detect(
            7.0,
            &hyp,
            ThresholdPolicy::Fixed(6.0),
            &ObservationModel::Poisson,
            3,
        )
        .unwrap();
        assert_eq!(report.decision, Decision::Present);
        assert_eq!(report.window_id, 3);
        assert!((report.p_fa - 0.016_563_608_5).abs() < 1e-9);
        assert!((report.p_md - 0.067_085_962_9).abs() < 1e-9);

        let below = detect(
            5.0,
            &hyp,
            ThresholdPolicy::Fixed(6.0),
            &ObservationModel::Poisson,
            0,
        )
        .unwrap();
        assert_eq!(below.decision, Decision::Absent);

        // τ = 0 always fires: p_fa = 1, p_md = 0.
        let always = detect(
            0.0,
            &hyp,
            ThresholdPolicy::Fixed(0.0),
            &ObservationModel::Poisson,
            0,
        )
        .unwrap();
        assert_eq!(always.decision, Decision::Present);
        assert_eq!(always.p_fa, 1.0);
        assert_eq!(always.p_md, 0.0);
    }

    #[test]
    fn degenerate_hypotheses_rejected() {
        let bad = Hypotheses {
            lambda0: 5.0,
            lambda1: 5.0,
        };
        assert!(matches!(
            detect(
                1.0,
                &bad,
                ThresholdPolicy::Fixed(1.0),
                &ObservationModel::Poisson,
                0
            ),
            Err(Error::DegenerateHypotheses { .. })
        ));
    }

    #[test]
    fn neyman_pearson_threshold() {
        let hyp = Hypotheses {
            lambda0: 2.0,
            lambda1: 10.0,
        };
        // tail(2, 5) ≈ 0.0527 > 0.02 ≥ tail(2, 6) ≈ 0.0166.
        let tau = threshold_for(
            ThresholdPolicy::TargetFalseAlarm(0.02),
            &hyp,
            &ObservationModel::Poisson,
        )
        .unwrap();
        assert_eq!(tau, 6.0);
        // The achieved false alarm never exceeds the target.
        for target in [0.5, 0.1, 0.01, 1e-4, 1e-8] {
            let tau = threshold_for(
                ThresholdPolicy::TargetFalseAlarm(target),
                &hyp,
                &ObservationModel::Poisson,
            )
            .unwrap();
            assert!(poisson_tail_ge(2.0, tau) <= target);
            if tau > 0.0 {
                // And τ is minimal.
                assert!(poisson_tail_ge(2.0, tau - 1.0) > target);
            }
        }
    }

    #[test]
    fn gaussian_tails_and_threshold() {
        let hyp = Hypotheses {
            lambda0: 10.0,
            lambda1: 20.0,
        };
        let model = ObservationModel::Gaussian {
            gain: 2.0,
            sigma: 3.0,
        };
        // τ at one sigma above the null mean: p_fa = Q(1).
        let r = detect(0.0, &hyp, ThresholdPolicy::Fixed(23.0), &model, 0).unwrap();
        assert!((r.p_fa - 0.158_655_253_931).abs() < 1e-9);
        // p_md = P(stat < 23 | mean 40) = Φ((23−40)/3).
        assert!((r.p_md - normal_tail((40.0 - 23.0) / 3.0)).abs() < 1e-12);

        let tau = threshold_for(ThresholdPolicy::TargetFalseAlarm(0.05), &hyp, &model).unwrap();
        assert!((normal_tail((tau - 20.0) / 3.0) - 0.05).abs() < 1e-9);

        // σ = 0 reduces to an exact separator.
        let exact = ObservationModel::Gaussian {
            gain: 2.0,
            sigma: 0.0,
        };
        let r = detect(40.0, &hyp, ThresholdPolicy::Fixed(30.0), &exact, 0).unwrap();
        assert_eq!(r.decision, Decision::Present);
        assert_eq!(r.p_fa, 0.0);
        assert_eq!(r.p_md, 0.0);
    }

    #[test]
    fn sampling_moments() {
        let mut rng = stream(2024, 0);
        // λ = 0 is always zero.
        for _ in 0..100 {
            assert_eq!(
                sample_count(0.0, &ObservationModel::Poisson, &mut rng).unwrap(),
                0.0
            );
        }
        // λ = 100: a million draws land within ±0.3 of the mean.
        let n = 1_000_000usize;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += sample_count(100.0, &ObservationModel::Poisson, &mut rng).unwrap();
        }
        let mean = acc / n as f64;
        assert!((99.7..=100.3).contains(&mean), "mean {mean}");

        // Zero-noise Gaussian is exactly λ·g.
        let exact = ObservationModel::Gaussian {
            gain: 3.0,
            sigma: 0.0,
        };
        assert_eq!(sample_count(7.0, &exact, &mut rng).unwrap(), 21.0);
    }

    #[test]
    fn empirical_tails_match_analytic() {
        // 10^6 draws per hypothesis: empirical rates within 3 standard
        // errors of the exact tails.
        let n = 1_000_000usize;
        let cases = [
            (2.0f64, 10.0f64, 6.0f64),
            (1.0, 5.0, 3.0),
            (5.0, 20.0, 12.0),
        ];
        for (idx, (l0, l1, tau)) in cases.into_iter().enumerate() {
            let mut rng = stream(777, idx as u64);
            let (mut fa, mut md) = (0u64, 0u64);
            for _ in 0..n {
                let null = sample_count(l0, &ObservationModel::Poisson, &mut rng).unwrap();
                if null >= tau {
                    fa += 1;
                }
                let alt = sample_count(l1, &ObservationModel::Poisson, &mut rng).unwrap();
                if alt < tau {
                    md += 1;
                }
            }
            let p_fa = poisson_tail_ge(l0, tau);
            let p_md = poisson_cdf_below(l1, tau);
            let se_fa = math::sqrt(p_fa * (1.0 - p_fa) / n as f64);
            let se_md = math::sqrt(p_md * (1.0 - p_md) / n as f64);
            let emp_fa = fa as f64 / n as f64;
            let emp_md = md as f64 / n as f64;
            assert!(
                (emp_fa - p_fa).abs() <= 3.0 * se_fa,
                "case {idx}: fa {emp_fa} vs {p_fa} (se {se_fa})"
            );
            assert!(
                (emp_md - p_md).abs() <= 3.0 * se_md,
                "case {idx}: md {emp_md} vs {p_md} (se {se_md})"
            );
        }
    }

    #[test]
    fn roc_reference_point_and_monotonicity() {
        let hyp = Hypotheses {
            lambda0: 2.0,
            lambda1: 10.0,
        };
        let curve = roc_curve(&hyp, &ObservationModel::Poisson, None).unwrap();
        // Endpoints: τ = 0 gives (1, 1); the far end approaches (0, 0).
        assert_eq!(curve[0].p_fa, 1.0);
        assert_eq!(curve[0].p_detect, 1.0);
        let last = curve.last().unwrap();
        assert!(last.p_fa < 1e-9 && last.p_detect < 1e-6);
        // Reference point at τ = 6.
        let at6 = curve.iter().find(|p| p.tau == 6.0).unwrap();
        assert!((at6.p_fa - 0.016_563_608_5).abs() < 1e-9);
        assert!((at6.p_detect - 0.932_914_037_1).abs() < 1e-9);
        // Both coordinates fall monotonically along the sweep.
        for w in curve.windows(2) {
            assert!(w[1].p_fa <= w[0].p_fa + 1e-15);
            assert!(w[1].p_detect <= w[0].p_detect + 1e-15);
        }
    }

    #[test]
    fn threshold_monotonicity() {
        let hyp = Hypotheses {
            lambda0: 3.0,
            lambda1: 12.0,
        };
        let mut prev_fa = 1.0;
        let mut prev_md = 0.0;
        for k in 0..40 {
            let (fa, md) = model_tails(&ObservationModel::Poisson, &hyp, k as f64);
            assert!(fa <= prev_fa + 1e-15);
            assert!(md >= prev_md - 1e-15);
            prev_fa = fa;
            prev_md = md;
        }
    }

    #[test]
    fn near_degenerate_roc_hugs_the_diagonal() {
        // Exactly equal hypotheses are rejected outright.
        let equal = Hypotheses {
            lambda0: 5.0,
            lambda1: 5.0,
        };
        assert!(matches!(
            roc_curve(&equal, &ObservationModel::Poisson, None),
            Err(Error::DegenerateHypotheses { .. })
        ));
        let hyp = Hypotheses {
            lambda0: 5.0,
            lambda1: 5.0 + 1e-6,
        };
        let curve = roc_curve(&hyp, &ObservationModel::Poisson, None).unwrap();
        for p in &curve {
            assert!((p.p_detect - p.p_fa).abs() < 1e-5);
        }
    }

    #[test]
    fn multi_species_independent_decisions() {
        let model = ObservationModel::Poisson;
        let mut obs = BTreeMap::new();
        obs.insert(String::from("flu"), 9.0);
        obs.insert(String::from("cov"), 1.0);
        let det = SpeciesDetector {
            hypotheses: Hypotheses {
                lambda0: 2.0,
                lambda1: 10.0,
            },
            policy: ThresholdPolicy::Fixed(6.0),
        };
        let mut config = BTreeMap::new();
        config.insert(String::from("flu"), det);
        config.insert(String::from("cov"), det);
        let out = multi_species_detect(&obs, &config, &model).unwrap();
        assert_eq!(out["flu"].as_ref().unwrap().decision, Decision::Present);
        assert_eq!(out["cov"].as_ref().unwrap().decision, Decision::Absent);

        // Single species reduces to detect().
        let single = detect(9.0, &det.hypotheses, det.policy, &model, 0).unwrap();
        assert_eq!(out["flu"].as_ref().unwrap().p_fa, single.p_fa);

        // Unknown key on either side is a configuration error.
        let mut missing = obs.clone();
        missing.remove("cov");
        assert!(matches!(
            multi_species_detect(&missing, &config, &model),
            Err(Error::UnknownSpecies(_))
        ));

        // A degenerate species errors in place; others still report.
        let mut cfg2 = config.clone();
        cfg2.insert(
            String::from("cov"),
            SpeciesDetector {
                hypotheses: Hypotheses {
                    lambda0: 2.0,
                    lambda1: 2.0,
                },
                policy: ThresholdPolicy::Fixed(6.0),
            },
        );
        let out = multi_species_detect(&obs, &cfg2, &model).unwrap();
        assert!(out["cov"].is_err());
        assert!(out["flu"].is_ok());
    }

    #[test]
    fn receiver_spec_validation() {
        let p = Point3::new(0.0, 0.0, 0.0);
        assert!(ReceiverSpec::new(p, 0.0, 1.0, 0.5, 1.0, NoiseKind::Poisson).is_err());
        assert!(ReceiverSpec::new(p, 1.0, 0.0, 0.5, 1.0, NoiseKind::Poisson).is_err());
        assert!(ReceiverSpec::new(p, 1.0, 1.0, 1.5, 1.0, NoiseKind::Poisson).is_err());
        assert!(
            ReceiverSpec::new(p, 1.0, 1.0, 0.5, 1.0, NoiseKind::Gaussian { sigma: -1.0 }).is_err()
        );
    }
}
