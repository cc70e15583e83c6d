//! Link-level simulation of aerosol-borne communication channels.
//!
//! An exhaling source releases virus-laden aerosols into moving air; a
//! downwind machine samples the air, senses bound particles and decides
//! whether the source is present. This crate provides the pieces of that
//! chain as pure functions over plain values:
//!
//! - [`dispersion`] — closed-form Gaussian puff/plume concentration fields,
//!   multi-source superposition and channel impulse responses,
//! - [`lagrangian`] — stochastic random-walk particle transport whose binned
//!   density converges to the analytic puff,
//! - [`eulerian`] — an explicit finite-difference advection–diffusion solver
//!   used as an independent numerical cross-check,
//! - [`receiver`] — sampler capture, noisy measurement, threshold detection
//!   and miss/false-alarm analysis,
//! - [`scenario`] — end-to-end on-off-keyed symbol streams, intersymbol
//!   interference metrics, interference and mobility experiments.
//!
//! The crate is `no_std` compatible (`alloc` required); disable the default
//! `std` feature for embedded use. The optional `parallel` feature enables
//! internal data parallelism via rayon. All results are independent of the
//! thread count: random streams are derived per particle / per window, never
//! shared (see [`rng`]).

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dispersion;
pub mod error;
pub mod eulerian;
pub mod grid;
pub mod lagrangian;
pub(crate) mod math;
pub mod medium;
pub mod receiver;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};
pub use grid::{Axis, ConcentrationField, ConcentrationSeries, GridSpec};
pub use medium::{Emission, MediumParams, Point3, Probe, SourceSpec};
