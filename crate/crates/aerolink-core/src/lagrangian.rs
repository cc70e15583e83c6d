//! Random-walk particle transport.
//!
//! Each tracked particle represents `Q/N` physical aerosols and follows an
//! Euler–Maruyama step per axis:
//!
//! ```text
//! Δx = u·dt + sqrt(2K·dt)·ξ,   Δy = sqrt(2K·dt)·ξ,   Δz = sqrt(2K·dt)·ξ
//! ```
//!
//! with independent standard-normal `ξ`. For constant `u` and `K` the
//! increments are exactly Gaussian at any `dt`, so the step size only affects
//! how finely boundary crossings are resolved. Every particle owns its own
//! random stream (see [`crate::rng`]), which makes results independent of
//! internal parallelism.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use rand_pcg::Pcg64Mcg;

use crate::error::{ensure_finite, Error, Result};
use crate::grid::{ConcentrationField, GridSpec};
use crate::math;
use crate::medium::{Emission, MediumParams, Point3, SourceSpec};
use crate::rng;

/// Cap on `n_particles × steps` for a single simulation run.
pub const PARTICLE_STEP_CAP: u128 = 10_000_000_000;

/// What happens to a particle that ends a step below the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Free space: the ground is ignored.
    None,
    /// Elastic reflection: `z ← −z`.
    ReflectGround,
    /// The ground captures the particle; it stops moving and leaves the
    /// airborne population.
    AbsorbGround,
}

/// Per-step integration parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub dt: f64,
    pub med: MediumParams,
    pub boundary: Boundary,
}

impl StepParams {
    pub fn new(dt: f64, med: MediumParams, boundary: Boundary) -> Result<Self> {
        ensure_finite("dt", dt)?;
        if dt <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: "must be > 0",
            });
        }
        Ok(Self { dt, med, boundary })
    }
}

/// An ensemble of tracked particles plus their random streams.
///
/// The particle count is fixed at creation; absorbed particles are flagged
/// dead rather than removed, so `alive + absorbed = N` always holds.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub positions: Vec<Point3>,
    pub alive: Vec<bool>,
    /// Per-particle species tag, an index into [`Self::tag_labels`].
    pub tags: Vec<u16>,
    pub tag_labels: Vec<String>,
    pub sim_time: f64,
    /// Physical particle count the ensemble stands for.
    pub physical_q: f64,
    rngs: Vec<Pcg64Mcg>,
}

/// Creates an ensemble of `n_particles` at the source position.
///
/// Streams derive from `seed`; repeated calls with the same arguments are
/// bit-identical. `sim_time` starts at the impulse release time.
pub fn seed_ensemble(src: &SourceSpec, n_particles: usize, seed: u64) -> Result<ParticleEnsemble> {
    let (q, t0) = match src.emission {
        Emission::Impulse { q, t0 } => (q, t0),
        _ => {
            return Err(Error::InvalidParameter {
                name: "src",
                reason: "seed_ensemble requires an impulse source",
            })
        }
    };
    if n_particles == 0 {
        return Err(Error::InvalidParameter {
            name: "n_particles",
            reason: "must be >= 1",
        });
    }
    let at = Point3::new(src.origin.0, src.origin.1, src.height);
    Ok(ParticleEnsemble {
        positions: alloc::vec![at; n_particles],
        alive: alloc::vec![true; n_particles],
        tags: alloc::vec![0; n_particles],
        tag_labels: alloc::vec![src.species.clone()],
        sim_time: t0,
        physical_q: q,
        rngs: (0..n_particles)
            .map(|i| rng::stream(seed, i as u64))
            .collect(),
    })
}

#[inline]
fn advance_one(
    pos: &mut Point3,
    alive: &mut bool,
    stream: &mut Pcg64Mcg,
    drift_x: f64,
    kick: f64,
    boundary: Boundary,
) {
    if !*alive {
        return;
    }
    let xi_x: f64 = stream.sample(StandardNormal);
    let xi_y: f64 = stream.sample(StandardNormal);
    let xi_z: f64 = stream.sample(StandardNormal);
    pos.x += drift_x + kick * xi_x;
    pos.y += kick * xi_y;
    pos.z += kick * xi_z;
    if pos.z < 0.0 {
        match boundary {
            Boundary::None => {}
            Boundary::ReflectGround => pos.z = -pos.z,
            Boundary::AbsorbGround => *alive = false,
        }
    }
}

impl ParticleEnsemble {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Physical aerosols represented by one tracked particle, `Q/N`.
    pub fn particle_weight(&self) -> f64 {
        self.physical_q / self.len() as f64
    }

    pub fn alive_count(&self) -> usize {
        self.alive.iter().filter(|a| **a).count()
    }

    /// Advances every live particle by one step and applies the boundary
    /// rule once. Deterministic for a given ensemble state regardless of the
    /// thread count.
    pub fn step(&mut self, sp: &StepParams) -> Result<()> {
        if sp.dt <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: "must be > 0",
            });
        }
        let drift_x = sp.med.wind_u * sp.dt;
        let kick = math::sqrt(2.0 * sp.med.diffusivity_k * sp.dt);
        let boundary = sp.boundary;

        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            self.positions
                .par_iter_mut()
                .zip(self.alive.par_iter_mut())
                .zip(self.rngs.par_iter_mut())
                .for_each(|((pos, alive), stream)| {
                    advance_one(pos, alive, stream, drift_x, kick, boundary)
                });
        }
        #[cfg(not(feature = "parallel"))]
        {
            for ((pos, alive), stream) in self
                .positions
                .iter_mut()
                .zip(self.alive.iter_mut())
                .zip(self.rngs.iter_mut())
            {
                advance_one(pos, alive, stream, drift_x, kick, boundary);
            }
        }
        self.sim_time += sp.dt;
        Ok(())
    }

    /// Mean position over live particles.
    pub fn mean_position(&self) -> Option<Point3> {
        let n = self.alive_count();
        if n == 0 {
            return None;
        }
        let mut m = Point3::new(0.0, 0.0, 0.0);
        for (p, a) in self.positions.iter().zip(&self.alive) {
            if *a {
                m.x += p.x;
                m.y += p.y;
                m.z += p.z;
            }
        }
        let inv = 1.0 / n as f64;
        Some(Point3::new(m.x * inv, m.y * inv, m.z * inv))
    }

    /// Per-axis sample variance over live particles (divisor n − 1).
    pub fn position_variance(&self) -> Option<Point3> {
        let n = self.alive_count();
        if n < 2 {
            return None;
        }
        let mean = self.mean_position()?;
        let mut v = Point3::new(0.0, 0.0, 0.0);
        for (p, a) in self.positions.iter().zip(&self.alive) {
            if *a {
                v.x += (p.x - mean.x) * (p.x - mean.x);
                v.y += (p.y - mean.y) * (p.y - mean.y);
                v.z += (p.z - mean.z) * (p.z - mean.z);
            }
        }
        let inv = 1.0 / (n - 1) as f64;
        Some(Point3::new(v.x * inv, v.y * inv, v.z * inv))
    }
}

/// Seeds an ensemble and advances it with fixed steps until `t_end`.
///
/// `ceil((t_end − t0)/dt)` steps are applied (so the final time is the first
/// step multiple at or past `t_end`). Bounded by [`PARTICLE_STEP_CAP`].
pub fn simulate(
    src: &SourceSpec,
    med: &MediumParams,
    n_particles: usize,
    seed: u64,
    dt: f64,
    t_end: f64,
    boundary: Boundary,
) -> Result<ParticleEnsemble> {
    let sp = StepParams::new(dt, *med, boundary)?;
    let t0 = match src.emission {
        Emission::Impulse { t0, .. } => t0,
        _ => {
            return Err(Error::InvalidParameter {
                name: "src",
                reason: "simulate requires an impulse source",
            })
        }
    };
    let span = t_end - t0;
    if span < dt {
        return Err(Error::InvalidParameter {
            name: "t_end",
            reason: "must be at least one dt past the release time",
        });
    }
    // Guard against 0.2/0.001 = 200.0000…3-style float fuzz.
    let steps = math::ceil(span / dt - 1e-9) as u64;
    // Check the work bound before allocating anything.
    let work = n_particles as u128 * steps as u128;
    if work > PARTICLE_STEP_CAP {
        return Err(Error::ResourceLimit {
            what: "particle-steps",
            requested: work,
            cap: PARTICLE_STEP_CAP,
        });
    }
    let mut ens = seed_ensemble(src, n_particles, seed)?;
    for _ in 0..steps {
        ens.step(&sp)?;
    }
    Ok(ens)
}

/// Like [`simulate`], but clones the ensemble state at each requested time.
///
/// Snapshot times must be strictly increasing; each snapshot is taken at the
/// first step boundary at or past the requested time.
pub fn simulate_snapshots(
    src: &SourceSpec,
    med: &MediumParams,
    n_particles: usize,
    seed: u64,
    dt: f64,
    snapshot_times: &[f64],
    boundary: Boundary,
) -> Result<Vec<ParticleEnsemble>> {
    let mut prev = f64::NEG_INFINITY;
    for &t in snapshot_times {
        if t <= prev {
            return Err(Error::NonMonotonicTimes {
                context: "snapshot times",
            });
        }
        prev = t;
    }
    let sp = StepParams::new(dt, *med, boundary)?;
    let t0 = match src.emission {
        Emission::Impulse { t0, .. } => t0,
        _ => {
            return Err(Error::InvalidParameter {
                name: "src",
                reason: "simulate requires an impulse source",
            })
        }
    };
    let last = match snapshot_times.last() {
        Some(&t) => t,
        None => return Ok(Vec::new()),
    };
    let total_steps = math::ceil((last - t0) / dt - 1e-9).max(0.0) as u64;
    let work = n_particles as u128 * total_steps as u128;
    if work > PARTICLE_STEP_CAP {
        return Err(Error::ResourceLimit {
            what: "particle-steps",
            requested: work,
            cap: PARTICLE_STEP_CAP,
        });
    }
    let mut ens = seed_ensemble(src, n_particles, seed)?;
    let mut out = Vec::with_capacity(snapshot_times.len());
    let mut done = 0u64;
    for &t in snapshot_times {
        let needed = math::ceil((t - t0) / dt - 1e-9).max(0.0) as u64;
        for _ in done..needed {
            ens.step(&sp)?;
        }
        done = done.max(needed);
        out.push(ens.clone());
    }
    Ok(out)
}

/// Bins live particles into grid cells as a concentration estimate.
///
/// Cell value = (count × Q/N) / cell volume. Live particles outside the grid
/// are not silently dropped: their count is returned alongside the field.
pub fn bin_concentration(
    ens: &ParticleEnsemble,
    grid: &GridSpec,
    physical_q: f64,
) -> Result<(ConcentrationField, u64)> {
    ensure_finite("physical_q", physical_q)?;
    if physical_q < 0.0 {
        return Err(Error::InvalidParameter {
            name: "physical_q",
            reason: "must be >= 0",
        });
    }
    let mut counts = alloc::vec![0u32; grid.cell_count()];
    let mut outside = 0u64;
    for (p, a) in ens.positions.iter().zip(&ens.alive) {
        if !*a {
            continue;
        }
        match (
            grid.x.cell_of(p.x),
            grid.y.cell_of(p.y),
            grid.z.cell_of(p.z),
        ) {
            (Some(ix), Some(iy), Some(iz)) => counts[grid.index(ix, iy, iz)] += 1,
            _ => outside += 1,
        }
    }
    let weight = physical_q / ens.len() as f64;
    let scale = weight / grid.cell_volume();
    let values = counts.iter().map(|&c| c as f64 * scale).collect();
    let species = if ens.tag_labels.len() == 1 {
        ens.tag_labels[0].clone()
    } else {
        String::from("mixed")
    };
    let field = ConcentrationField::new(*grid, values, ens.sim_time, species)?;
    Ok((field, outside))
}
