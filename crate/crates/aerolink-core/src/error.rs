//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter failed validation (NaN, infinity, wrong sign, ...).
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    /// Evaluation time at or before the release instant; the t → 0 delta has
    /// no finite concentration.
    InvalidTime { t: f64 },
    /// Plume evaluation at or upwind of the source (x ≤ 0); the slender-plume
    /// form only holds downwind.
    OutOfPlume { x: f64 },
    /// The requested model needs nonzero wind.
    StillAir,
    /// An operation over sources received an empty list.
    EmptySources,
    /// The observation window is not covered by the concentration series.
    WindowNotCovered {
        window_start: f64,
        window_end: f64,
        series_start: f64,
        series_end: f64,
    },
    /// Signal-present mean does not exceed the background mean.
    DegenerateHypotheses { lambda0: f64, lambda1: f64 },
    /// Species key present on one side of a detection call but not the other.
    UnknownSpecies(String),
    /// Explicit time stepping would be unstable for this grid and dt.
    UnstableConfig {
        advection_cfl: f64,
        diffusion_number: f64,
    },
    /// Work or memory bound exceeded.
    ResourceLimit {
        what: &'static str,
        requested: u128,
        cap: u128,
    },
    /// Emission time outside the span of the position track.
    TrackCoverage { t: f64 },
    /// Event or sample times must be strictly increasing.
    NonMonotonicTimes { context: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::InvalidTime { t } => {
                write!(
                    f,
                    "invalid evaluation time {t} s: puff requires t > release time"
                )
            }
            Error::OutOfPlume { x } => {
                write!(
                    f,
                    "point at x = {x} m is not downwind of the source (requires x > 0)"
                )
            }
            Error::StillAir => write!(f, "plume model requires wind speed u > 0"),
            Error::EmptySources => write!(f, "source list is empty"),
            Error::WindowNotCovered {
                window_start,
                window_end,
                series_start,
                series_end,
            } => write!(
                f,
                "window [{window_start}, {window_end}] s not covered by series \
                 span [{series_start}, {series_end}] s"
            ),
            Error::DegenerateHypotheses { lambda0, lambda1 } => write!(
                f,
                "degenerate hypotheses: lambda1 ({lambda1}) must exceed lambda0 ({lambda0})"
            ),
            Error::UnknownSpecies(s) => write!(f, "unknown species key `{s}`"),
            Error::UnstableConfig {
                advection_cfl,
                diffusion_number,
            } => write!(
                f,
                "unstable solver configuration: CFL = {advection_cfl} (limit 1), \
                 diffusion number = {diffusion_number} (limit 0.5)"
            ),
            Error::ResourceLimit {
                what,
                requested,
                cap,
            } => write!(f, "{what} = {requested} exceeds cap {cap}"),
            Error::TrackCoverage { t } => {
                write!(
                    f,
                    "emission at t = {t} s lies outside the position track span"
                )
            }
            Error::NonMonotonicTimes { context } => {
                write!(f, "{context}: times must be strictly increasing")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

/// Rejects NaN and infinities.
pub(crate) fn ensure_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: "must be finite",
        })
    }
}
