//! Sources, medium parameters and probes.
//!
//! Units are SI throughout: meters, seconds, particle counts; concentrations
//! are particles/m³. Wind blows along +x; crosswind components are taken as
//! negligible.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{ensure_finite, Error, Result};

/// Breathing height used when a scenario does not specify a source height.
pub const DEFAULT_SOURCE_HEIGHT_M: f64 = 1.7;

/// A point in the simulation frame (meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Transport properties of the air between source and receiver.
///
/// One effective eddy diffusivity covers turbulent mixing on all axes;
/// molecular diffusion is orders of magnitude smaller and folded in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumParams {
    /// Mean wind speed along +x, m/s. Must be ≥ 0.
    pub wind_u: f64,
    /// Effective isotropic eddy diffusivity, m²/s. Must be > 0.
    pub diffusivity_k: f64,
    /// Mirror the source at z = −H so no mass crosses the ground plane.
    pub reflect_ground: bool,
}

impl MediumParams {
    pub fn new(wind_u: f64, diffusivity_k: f64, reflect_ground: bool) -> Result<Self> {
        ensure_finite("wind_u", wind_u)?;
        ensure_finite("diffusivity_k", diffusivity_k)?;
        if wind_u < 0.0 {
            return Err(Error::InvalidParameter {
                name: "wind_u",
                reason: "must be >= 0",
            });
        }
        if diffusivity_k <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "diffusivity_k",
                reason: "must be > 0",
            });
        }
        Ok(Self {
            wind_u,
            diffusivity_k,
            reflect_ground,
        })
    }
}

/// How a source releases aerosols.
#[derive(Debug, Clone, PartialEq)]
pub enum Emission {
    /// `q` particles released instantaneously at time `t0`.
    Impulse { q: f64, t0: f64 },
    /// Steady release of `qdot` particles per second.
    Continuous { qdot: f64 },
    /// A train of impulses, `(t0, q)`, with strictly increasing times.
    Schedule(Vec<(f64, f64)>),
}

/// An aerosol emitter: where it sits and what it releases.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    /// Ground-plane position of the emitter, m.
    pub origin: (f64, f64),
    /// Release height above ground, m.
    pub height: f64,
    /// Species label; detection treats distinct labels as orthogonal.
    pub species: String,
    pub emission: Emission,
}

impl SourceSpec {
    pub fn new(
        origin: (f64, f64),
        height: f64,
        species: impl Into<String>,
        emission: Emission,
    ) -> Result<Self> {
        ensure_finite("origin.x", origin.0)?;
        ensure_finite("origin.y", origin.1)?;
        ensure_finite("height", height)?;
        if height < 0.0 {
            return Err(Error::InvalidParameter {
                name: "height",
                reason: "must be >= 0",
            });
        }
        match &emission {
            Emission::Impulse { q, t0 } => {
                ensure_finite("q", *q)?;
                ensure_finite("t0", *t0)?;
                if *q <= 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "q",
                        reason: "must be > 0",
                    });
                }
            }
            Emission::Continuous { qdot } => {
                ensure_finite("qdot", *qdot)?;
                if *qdot <= 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "qdot",
                        reason: "must be > 0",
                    });
                }
            }
            Emission::Schedule(events) => {
                if events.is_empty() {
                    return Err(Error::InvalidParameter {
                        name: "schedule",
                        reason: "must contain at least one impulse",
                    });
                }
                let mut prev = f64::NEG_INFINITY;
                for (t0, q) in events {
                    ensure_finite("schedule.t0", *t0)?;
                    ensure_finite("schedule.q", *q)?;
                    if *q <= 0.0 {
                        return Err(Error::InvalidParameter {
                            name: "schedule.q",
                            reason: "must be > 0",
                        });
                    }
                    if *t0 <= prev {
                        return Err(Error::NonMonotonicTimes {
                            context: "emission schedule",
                        });
                    }
                    prev = *t0;
                }
            }
        }
        Ok(Self {
            origin,
            height,
            species: species.into(),
            emission,
        })
    }

    /// Impulse source at `origin` with height `h`, releasing `q` particles at t = 0.
    pub fn impulse_at(
        origin: (f64, f64),
        h: f64,
        species: impl Into<String>,
        q: f64,
    ) -> Result<Self> {
        Self::new(origin, h, species, Emission::Impulse { q, t0: 0.0 })
    }

    /// Total particles released up to (and including) time `t`.
    pub fn released_mass(&self, t: f64) -> f64 {
        match &self.emission {
            Emission::Impulse { q, t0 } => {
                if t >= *t0 {
                    *q
                } else {
                    0.0
                }
            }
            Emission::Continuous { qdot } => qdot * t.max(0.0),
            Emission::Schedule(events) => events
                .iter()
                .filter(|(t0, _)| t >= *t0)
                .map(|(_, q)| q)
                .sum(),
        }
    }
}

/// A fixed sampling location with the instants at which the concentration is
/// to be read out.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub position: Point3,
    pub sample_times: Vec<f64>,
}

impl Probe {
    pub fn new(position: Point3, sample_times: Vec<f64>) -> Result<Self> {
        if !position.is_finite() {
            return Err(Error::InvalidParameter {
                name: "position",
                reason: "must be finite",
            });
        }
        let mut prev = f64::NEG_INFINITY;
        for &t in &sample_times {
            ensure_finite("sample_times", t)?;
            if t < 0.0 {
                return Err(Error::InvalidParameter {
                    name: "sample_times",
                    reason: "must be non-negative",
                });
            }
            if t <= prev {
                return Err(Error::NonMonotonicTimes {
                    context: "probe sample times",
                });
            }
            prev = t;
        }
        Ok(Self {
            position,
            sample_times,
        })
    }

    /// Evenly spaced sample times over `[start, end]` with `n` points.
    pub fn linspace(position: Point3, start: f64, end: f64, n: usize) -> Result<Self> {
        if n < 2 || end.is_nan() || start.is_nan() || end <= start {
            return Err(Error::InvalidParameter {
                name: "linspace",
                reason: "need n >= 2 and end > start",
            });
        }
        let step = (end - start) / (n - 1) as f64;
        let times = (0..n).map(|i| start + step * i as f64).collect();
        Self::new(position, times)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medium_rejects_bad_params() {
        assert!(MediumParams::new(-1.0, 0.03, false).is_err());
        assert!(MediumParams::new(1.0, 0.0, false).is_err());
        assert!(MediumParams::new(f64::NAN, 0.03, false).is_err());
        assert!(MediumParams::new(0.0, 0.03, true).is_ok());
    }

    #[test]
    fn source_rejects_nonpositive_strength() {
        assert!(SourceSpec::impulse_at((0.0, 0.0), 1.7, "flu", 0.0).is_err());
        assert!(
            SourceSpec::new((0.0, 0.0), 1.7, "flu", Emission::Continuous { qdot: -5.0 }).is_err()
        );
    }

    #[test]
    fn schedule_times_strictly_increase() {
        let bad = Emission::Schedule(alloc::vec![(0.0, 10.0), (0.0, 10.0)]);
        assert_eq!(
            SourceSpec::new((0.0, 0.0), 1.7, "flu", bad).unwrap_err(),
            Error::NonMonotonicTimes {
                context: "emission schedule"
            }
        );
    }

    #[test]
    fn released_mass_accumulates() {
        let src = SourceSpec::new(
            (0.0, 0.0),
            1.7,
            "flu",
            Emission::Schedule(alloc::vec![(0.0, 10.0), (1.0, 20.0)]),
        )
        .unwrap();
        assert_eq!(src.released_mass(0.5), 10.0);
        assert_eq!(src.released_mass(1.0), 30.0);
        let cont =
            SourceSpec::new((0.0, 0.0), 0.0, "flu", Emission::Continuous { qdot: 3.0 }).unwrap();
        assert_eq!(cont.released_mass(2.0), 6.0);
    }

    #[test]
    fn probe_times_validated() {
        let p = Point3::new(1.0, 0.0, 1.7);
        assert!(Probe::new(p, alloc::vec![0.1, 0.2, 0.3]).is_ok());
        assert!(Probe::new(p, alloc::vec![0.2, 0.1]).is_err());
        assert!(Probe::new(p, alloc::vec![-0.1]).is_err());
    }
}
