//! Closed-form transport models for a point aerosol source in steady wind.
//!
//! Both models solve the constant-coefficient advection–diffusion equation
//! `∂C/∂t + u ∂C/∂x = K ∇²C` for a point release:
//!
//! - **Puff** (transient, instantaneous release of `Q` particles):
//!   `C = Q/(4πKt)^{3/2} · exp(−((x−ut)² + y²)/(4Kt)) · V(z)` where the
//!   vertical factor `V` is `exp(−(z−H)²/(4Kt))`, plus the image term
//!   `exp(−(z+H)²/(4Kt))` when the ground reflects.
//! - **Plume** (steady state, continuous release of `Q̇` particles/s):
//!   `C = Q̇/(2πuσ²) · exp(−y²/(2σ²)) · V(z)` with Fickian widths
//!   `σ_y = σ_z = σ = sqrt(2Kx/u)` growing downwind.
//!
//! Concentrations that underflow `f64` are exactly `0.0`, never negative.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{ensure_finite, Error, Result};
use crate::grid::{ConcentrationField, ConcentrationSeries, GridSpec};
use crate::math;
use crate::medium::{Emission, MediumParams, Point3, Probe, SourceSpec};

const TWO_PI: f64 = core::f64::consts::TAU;
const FOUR_PI: f64 = 2.0 * TWO_PI;

/// Transient concentration at `p`, `elapsed` seconds after an instantaneous
/// release of `q` particles from `(origin, height)`.
///
/// This is the kernel shared by every impulse-derived quantity; callers have
/// already validated `elapsed > 0`.
fn puff_kernel(
    q: f64,
    origin: (f64, f64),
    height: f64,
    med: &MediumParams,
    p: Point3,
    elapsed: f64,
) -> f64 {
    let four_kt = 4.0 * med.diffusivity_k * elapsed;
    let dx = p.x - origin.0 - med.wind_u * elapsed;
    let dy = p.y - origin.1;
    let horiz = math::exp(-(dx * dx + dy * dy) / four_kt);
    let dz = p.z - height;
    let mut vert = math::exp(-(dz * dz) / four_kt);
    if med.reflect_ground {
        let dzi = p.z + height;
        vert += math::exp(-(dzi * dzi) / four_kt);
    }
    // q multiplies last so that scaling the source strength scales the
    // result with no intermediate rounding differences.
    q * (horiz * vert / math::powf(FOUR_PI * med.diffusivity_k * elapsed, 1.5))
}

fn check_point(p: Point3) -> Result<()> {
    if p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "point",
            reason: "must be finite",
        })
    }
}

// MediumParams can be built as a literal (the particle stepper accepts
// K = 0); the closed forms divide by K and must re-check.
fn check_medium(med: &MediumParams) -> Result<()> {
    if med.diffusivity_k > 0.0 && med.diffusivity_k.is_finite() && med.wind_u >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "med",
            reason: "closed forms need finite diffusivity_k > 0 and wind_u >= 0",
        })
    }
}

/// Concentration of an impulse source at point `p` and time `t`.
///
/// `t` is absolute; the release instant is `src.emission`'s `t0`. Fails with
/// [`Error::InvalidTime`] when `t − t0 ≤ 0` and with
/// [`Error::InvalidParameter`] for non-impulse sources or non-finite inputs.
pub fn puff_concentration(src: &SourceSpec, med: &MediumParams, p: Point3, t: f64) -> Result<f64> {
    check_point(p)?;
    check_medium(med)?;
    ensure_finite("t", t)?;
    let (q, t0) = match src.emission {
        Emission::Impulse { q, t0 } => (q, t0),
        _ => {
            return Err(Error::InvalidParameter {
                name: "src",
                reason: "puff_concentration requires an impulse source",
            })
        }
    };
    let elapsed = t - t0;
    if elapsed <= 0.0 {
        return Err(Error::InvalidTime { t: elapsed });
    }
    Ok(puff_kernel(q, src.origin, src.height, med, p, elapsed))
}

/// Steady-state concentration of a continuous source at point `p`.
///
/// Fails with [`Error::OutOfPlume`] at or upwind of the source and with
/// [`Error::StillAir`] when `u = 0` (no steady plume exists without wind).
pub fn plume_concentration(src: &SourceSpec, med: &MediumParams, p: Point3) -> Result<f64> {
    check_point(p)?;
    check_medium(med)?;
    let qdot = match src.emission {
        Emission::Continuous { qdot } => qdot,
        _ => {
            return Err(Error::InvalidParameter {
                name: "src",
                reason: "plume_concentration requires a continuous source",
            })
        }
    };
    if med.wind_u == 0.0 {
        return Err(Error::StillAir);
    }
    let x = p.x - src.origin.0;
    if x <= 0.0 {
        return Err(Error::OutOfPlume { x });
    }
    // sigma_y = sigma_z => sigma_y * sigma_z = 2Kx/u.
    let sigma2 = 2.0 * med.diffusivity_k * x / med.wind_u;
    let dy = p.y - src.origin.1;
    let lateral = math::exp(-(dy * dy) / (2.0 * sigma2));
    let dz = p.z - src.height;
    let mut vert = math::exp(-(dz * dz) / (2.0 * sigma2));
    if med.reflect_ground {
        let dzi = p.z + src.height;
        vert += math::exp(-(dzi * dzi) / (2.0 * sigma2));
    }
    Ok(qdot * (lateral * vert / (TWO_PI * med.wind_u * sigma2)))
}

/// Concentration of any source kind at `(p, t)`.
///
/// Impulses that have not yet fired contribute zero; schedules sum their
/// fired impulses; continuous sources use the steady plume.
pub fn source_concentration(
    src: &SourceSpec,
    med: &MediumParams,
    p: Point3,
    t: f64,
) -> Result<f64> {
    check_point(p)?;
    check_medium(med)?;
    ensure_finite("t", t)?;
    match &src.emission {
        Emission::Impulse { q, t0 } => {
            let elapsed = t - t0;
            if elapsed <= 0.0 {
                Ok(0.0)
            } else {
                Ok(puff_kernel(*q, src.origin, src.height, med, p, elapsed))
            }
        }
        Emission::Continuous { .. } => plume_concentration(src, med, p),
        Emission::Schedule(events) => {
            let mut c = 0.0;
            for &(t0, q) in events {
                let elapsed = t - t0;
                if elapsed > 0.0 {
                    c += puff_kernel(q, src.origin, src.height, med, p, elapsed);
                }
            }
            Ok(c)
        }
    }
}

/// Superposed concentration of several sources at `(p, t)`, keyed by species.
///
/// The advection–diffusion equation is linear, so per-species totals are the
/// sums of single-source evaluations; species never mix.
pub fn superpose(
    sources: &[SourceSpec],
    med: &MediumParams,
    p: Point3,
    t: f64,
) -> Result<BTreeMap<String, f64>> {
    if sources.is_empty() {
        return Err(Error::EmptySources);
    }
    let mut per_species = BTreeMap::new();
    for src in sources {
        let c = source_concentration(src, med, p, t)?;
        *per_species.entry(src.species.clone()).or_insert(0.0) += c;
    }
    Ok(per_species)
}

/// Channel impulse response: the puff concentration at the probe position
/// sampled at the probe's times. All sample times must be after the release.
pub fn impulse_response(
    src: &SourceSpec,
    med: &MediumParams,
    probe: &Probe,
) -> Result<ConcentrationSeries> {
    let values: Vec<f64> = probe
        .sample_times
        .iter()
        .map(|&t| puff_concentration(src, med, probe.position, t))
        .collect::<Result<_>>()?;
    ConcentrationSeries::new(probe.sample_times.clone(), values, src.species.clone())
}

/// Snapshot of the concentration field on `grid` at time `t`.
///
/// Cell values are the concentration at the cell center. Works for every
/// emission kind; a not-yet-fired impulse yields an all-zero field.
pub fn field_snapshot(
    src: &SourceSpec,
    med: &MediumParams,
    grid: &GridSpec,
    t: f64,
) -> Result<ConcentrationField> {
    ensure_finite("t", t)?;
    if let Emission::Impulse { t0, .. } = src.emission {
        if t - t0 <= 0.0 {
            return Err(Error::InvalidTime { t: t - t0 });
        }
    }
    let mut values = alloc::vec![0.0f64; grid.cell_count()];
    let fill = |values: &mut [f64]| -> Result<()> {
        let nx = grid.x.n;
        let ny = grid.y.n;
        for iz in 0..grid.z.n {
            let z = grid.z.center(iz);
            for iy in 0..ny {
                let y = grid.y.center(iy);
                let row = (iz * ny + iy) * nx;
                for ix in 0..nx {
                    let p = Point3::new(grid.x.center(ix), y, z);
                    values[row + ix] = source_concentration(src, med, p, t)?;
                }
            }
        }
        Ok(())
    };
    fill(&mut values)?;
    ConcentrationField::new(*grid, values, t, src.species.clone())
}

/// Airborne particle count at time `t`.
///
/// The spatial integral of the puff over all space (ground reflection off) or
/// over the half space z ≥ 0 (reflection on) equals the released mass, so
/// this reduces to the mass emitted up to `t`: `Q` per fired impulse and
/// `Q̇·t` for continuous release.
pub fn total_mass(src: &SourceSpec, _med: &MediumParams, t: f64) -> Result<f64> {
    ensure_finite("t", t)?;
    if t <= 0.0 {
        if let Emission::Impulse { t0, .. } = src.emission {
            if t - t0 <= 0.0 {
                return Err(Error::InvalidTime { t: t - t0 });
            }
        }
    }
    Ok(src.released_mass(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;

    fn reference_medium() -> MediumParams {
        MediumParams::new(1.0, 0.03, false).unwrap()
    }

    fn reference_impulse() -> SourceSpec {
        SourceSpec::impulse_at((0.0, 0.0), 1.7, "flu", 40_000.0).unwrap()
    }

    #[test]
    fn puff_peak_value_at_50ms() {
        // Spatial peak sits at (u t, 0, H); value Q/(4πKt)^{3/2}.
        let src = reference_impulse();
        let med = reference_medium();
        let c = puff_concentration(&src, &med, Point3::new(0.05, 0.0, 1.7), 0.05).unwrap();
        let expected = 1.545_639_851_5e7; // Q/(4π·0.03·0.05)^{3/2}
        assert!(
            (c - expected).abs() / expected < 1e-9,
            "peak {c:e} vs {expected:e}"
        );
    }

    #[test]
    fn puff_peak_decays_as_t_to_minus_three_halves() {
        let src = reference_impulse();
        let med = reference_medium();
        let c1 = puff_concentration(&src, &med, Point3::new(0.05, 0.0, 1.7), 0.05).unwrap();
        let c2 = puff_concentration(&src, &med, Point3::new(0.2, 0.0, 1.7), 0.2).unwrap();
        // (0.2/0.05)^{3/2} = 8 exactly.
        assert!((c1 / c2 - 8.0).abs() < 1e-12 * 8.0);
    }

    #[test]
    fn puff_symmetric_in_y() {
        let src = reference_impulse();
        let med = reference_medium();
        for &(y, t) in &[(0.04, 0.05), (0.3, 0.7), (1.5, 2.0)] {
            let a = puff_concentration(&src, &med, Point3::new(0.1, y, 1.7), t).unwrap();
            let b = puff_concentration(&src, &med, Point3::new(0.1, -y, 1.7), t).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn puff_far_tail_underflows_to_zero() {
        let src = reference_impulse();
        let med = reference_medium();
        // 10 m from the puff center at t = 0.05 s: exponent ≈ −16667.
        let c = puff_concentration(&src, &med, Point3::new(10.05, 0.0, 1.7), 0.05).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn puff_rejects_invalid_times_and_inputs() {
        let src = reference_impulse();
        let med = reference_medium();
        let p = Point3::new(0.1, 0.0, 1.7);
        assert!(matches!(
            puff_concentration(&src, &med, p, 0.0),
            Err(Error::InvalidTime { .. })
        ));
        assert!(matches!(
            puff_concentration(&src, &med, p, -1.0),
            Err(Error::InvalidTime { .. })
        ));
        assert!(puff_concentration(&src, &med, Point3::new(f64::NAN, 0.0, 0.0), 1.0).is_err());
        assert!(puff_concentration(&src, &med, p, f64::INFINITY).is_err());
    }

    #[test]
    fn puff_reflection_never_reduces_concentration() {
        let src = reference_impulse();
        let free = reference_medium();
        let refl = MediumParams::new(1.0, 0.03, true).unwrap();
        for &(z, t) in &[(0.0, 0.1), (1.7, 0.1), (3.0, 0.5), (0.2, 2.0)] {
            let p = Point3::new(0.1, 0.02, z);
            let a = puff_concentration(&src, &free, p, t).unwrap();
            let b = puff_concentration(&src, &refl, p, t).unwrap();
            assert!(b >= a);
        }
    }

    #[test]
    fn plume_centerline_value() {
        // Q̇=100/s, u=1, K=0.03 at (1, 0, H): 100/(2π·0.06) ≈ 265.258238.
        let src =
            SourceSpec::new((0.0, 0.0), 1.7, "flu", Emission::Continuous { qdot: 100.0 }).unwrap();
        let med = reference_medium();
        let c = plume_concentration(&src, &med, Point3::new(1.0, 0.0, 1.7)).unwrap();
        assert!((c - 265.258_238_486).abs() < 1e-6);

        // Doubling Q̇ doubles C everywhere.
        let src2 =
            SourceSpec::new((0.0, 0.0), 1.7, "flu", Emission::Continuous { qdot: 200.0 }).unwrap();
        let c2 = plume_concentration(&src2, &med, Point3::new(1.0, 0.0, 1.7)).unwrap();
        assert_eq!(c2, 2.0 * c);
    }

    #[test]
    fn plume_offaxis_at_one_sigma() {
        let src =
            SourceSpec::new((0.0, 0.0), 1.7, "flu", Emission::Continuous { qdot: 100.0 }).unwrap();
        let med = reference_medium();
        let sigma = math::sqrt(2.0 * 0.03 * 1.0 / 1.0);
        let on = plume_concentration(&src, &med, Point3::new(1.0, 0.0, 1.7)).unwrap();
        let off = plume_concentration(&src, &med, Point3::new(1.0, sigma, 1.7)).unwrap();
        assert!((off / on - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn plume_invalid_upwind_and_still_air() {
        let src =
            SourceSpec::new((0.0, 0.0), 1.7, "flu", Emission::Continuous { qdot: 100.0 }).unwrap();
        let med = reference_medium();
        assert!(matches!(
            plume_concentration(&src, &med, Point3::new(0.0, 0.0, 1.7)),
            Err(Error::OutOfPlume { .. })
        ));
        assert!(matches!(
            plume_concentration(&src, &med, Point3::new(-1.0, 0.0, 1.7)),
            Err(Error::OutOfPlume { .. })
        ));
        let calm = MediumParams::new(0.0, 0.03, false).unwrap();
        assert_eq!(
            plume_concentration(&src, &calm, Point3::new(1.0, 0.0, 1.7)),
            Err(Error::StillAir)
        );
    }

    #[test]
    fn superpose_matches_singles_and_separates_species() {
        let med = reference_medium();
        let p = Point3::new(0.2, 0.05, 1.7);
        let a = reference_impulse();
        let mut b = reference_impulse();
        b.species = String::from("cov");
        b.origin = (0.1, 0.0);

        let single = puff_concentration(&a, &med, p, 0.3).unwrap();
        let map = superpose(core::slice::from_ref(&a), &med, p, 0.3).unwrap();
        assert_eq!(map.len(), 1);
        assert_eq!(map["flu"], single);

        // Two co-located identical sources: exactly 2x.
        let map2 = superpose(&[a.clone(), a.clone()], &med, p, 0.3).unwrap();
        assert_eq!(map2["flu"], single + single);

        // Distinct species stay on separate keys.
        let mixed = superpose(&[a.clone(), b.clone()], &med, p, 0.3).unwrap();
        assert_eq!(mixed.len(), 2);
        assert_eq!(mixed["flu"], single);
        assert_eq!(mixed["cov"], puff_concentration(&b, &med, p, 0.3).unwrap());

        assert_eq!(superpose(&[], &med, p, 0.3), Err(Error::EmptySources));
    }

    #[test]
    fn superpose_ignores_unfired_impulses() {
        let med = reference_medium();
        let p = Point3::new(0.1, 0.0, 1.7);
        let src = SourceSpec::new(
            (0.0, 0.0),
            1.7,
            "flu",
            Emission::Impulse {
                q: 40_000.0,
                t0: 5.0,
            },
        )
        .unwrap();
        let map = superpose(&[src], &med, p, 1.0).unwrap();
        assert_eq!(map["flu"], 0.0);
    }

    #[test]
    fn impulse_response_peak_near_transit_time() {
        // Probe 1 m downwind, u = 1 m/s: peak time solves t² + 6Kt − 1 = 0,
        // i.e. t = −3K + sqrt(9K² + 1) ≈ 0.914 s for K = 0.03.
        let src = reference_impulse();
        let med = reference_medium();
        let probe = Probe::linspace(Point3::new(1.0, 0.0, 1.7), 0.1, 3.0, 291).unwrap();
        let series = impulse_response(&src, &med, &probe).unwrap();
        let peak_t = series.times[series.argmax().unwrap()];
        assert!((0.9..=1.0).contains(&peak_t), "peak at {peak_t}");

        // Single-peaked: values rise to the argmax then fall.
        let k = series.argmax().unwrap();
        assert!(series.values[..k].windows(2).all(|w| w[0] <= w[1]));
        assert!(series.values[k..].windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn impulse_response_is_linear_in_q() {
        let med = reference_medium();
        let probe = Probe::linspace(Point3::new(1.0, 0.0, 1.7), 0.1, 3.0, 30).unwrap();
        let s1 = impulse_response(&reference_impulse(), &med, &probe).unwrap();

        // Power-of-two scaling is exact in IEEE 754.
        let src8 = SourceSpec::impulse_at((0.0, 0.0), 1.7, "flu", 8.0 * 40_000.0).unwrap();
        let s8 = impulse_response(&src8, &med, &probe).unwrap();
        for (a, b) in s1.values.iter().zip(&s8.values) {
            assert_eq!(*b, 8.0 * a);
        }

        // Arbitrary factors agree to a rounding error.
        let src10 = SourceSpec::impulse_at((0.0, 0.0), 1.7, "flu", 400_000.0).unwrap();
        let s10 = impulse_response(&src10, &med, &probe).unwrap();
        for (a, b) in s1.values.iter().zip(&s10.values) {
            assert!((b - 10.0 * a).abs() <= 1e-15 * b.abs());
        }
    }

    #[test]
    fn impulse_response_pure_diffusion_decays_at_origin() {
        // u = 0, probe at the source: C(t) = Q/(4πKt)^{3/2}, strictly decreasing.
        let src = reference_impulse();
        let calm = MediumParams::new(0.0, 0.03, false).unwrap();
        let probe = Probe::linspace(Point3::new(0.0, 0.0, 1.7), 0.05, 2.0, 40).unwrap();
        let series = impulse_response(&src, &calm, &probe).unwrap();
        assert!(series.values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn snapshot_peaks_track_the_wind() {
        let src = reference_impulse();
        let med = reference_medium();
        let grid = GridSpec::new(
            Axis::new(-0.5, 0.01, 200).unwrap(),
            Axis::new(-0.5, 0.01, 100).unwrap(),
            Axis::pinned(1.7, 0.01).unwrap(),
        )
        .unwrap();
        let f50 = field_snapshot(&src, &med, &grid, 0.05).unwrap();
        let (peak50, (px, py, _)) = f50.peak().unwrap();
        assert!((px - 0.05).abs() <= 0.01 + 1e-12);
        assert!(py.abs() <= 0.01 + 1e-12);

        let f800 = field_snapshot(&src, &med, &grid, 0.8).unwrap();
        let (peak800, _) = f800.peak().unwrap();
        assert!(peak800 < peak50);
    }

    #[test]
    fn snapshot_empty_grid_is_ok() {
        let src = reference_impulse();
        let med = reference_medium();
        let empty = GridSpec::new(
            Axis::covering(0.0, 0.0, 0.01).unwrap(),
            Axis::covering(0.0, 0.0, 0.01).unwrap(),
            Axis::pinned(1.7, 0.01).unwrap(),
        )
        .unwrap();
        let f = field_snapshot(&src, &med, &empty, 0.05).unwrap();
        assert!(f.values.is_empty());
    }

    #[test]
    fn total_mass_is_released_mass() {
        let med = reference_medium();
        let src = reference_impulse();
        assert_eq!(total_mass(&src, &med, 0.05).unwrap(), 40_000.0);
        assert_eq!(total_mass(&src, &med, 123.0).unwrap(), 40_000.0);
        let refl = MediumParams::new(1.0, 0.03, true).unwrap();
        assert_eq!(total_mass(&src, &refl, 0.05).unwrap(), 40_000.0);
        assert!(total_mass(&src, &med, 0.0).is_err());
    }

    #[test]
    fn quadrature_mass_within_8_sigma_box() {
        // Simpson integration of the free-space puff over a box of half-width
        // 8σ, σ = sqrt(2Kt), recovers at least 99.9% of Q.
        let src = reference_impulse();
        let med = reference_medium();
        let t = 0.2;
        let sigma = math::sqrt(2.0 * med.diffusivity_k * t);
        let hw = 8.0 * sigma;
        let n = 96usize; // Simpson intervals per axis (even)
        let h = 2.0 * hw / n as f64;
        let w1 = |i: usize| -> f64 {
            if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };
        let center_x = med.wind_u * t;
        let mut sum = 0.0;
        for ix in 0..=n {
            let x = center_x - hw + ix as f64 * h;
            for iy in 0..=n {
                let y = -hw + iy as f64 * h;
                let wxy = w1(ix) * w1(iy);
                for iz in 0..=n {
                    let z = 1.7 - hw + iz as f64 * h;
                    let c = puff_concentration(&src, &med, Point3::new(x, y, z), t).unwrap();
                    sum += wxy * w1(iz) * c;
                }
            }
        }
        let mass = sum * (h / 3.0) * (h / 3.0) * (h / 3.0);
        assert!(
            (0.999 * 40_000.0..=1.001 * 40_000.0).contains(&mass),
            "quadrature mass {mass}"
        );
    }

    #[test]
    fn plume_equals_time_integrated_puff_downwind() {
        // The time integral of the puff response, scaled by Q̇/Q, matches the
        // plume value in the slender-plume regime (u·x/K ≥ 10). Trapezoid
        // over t with margins wide enough for the full transit.
        let med = reference_medium();
        let qdot = 100.0;
        let q = 40_000.0;
        let puff_src = SourceSpec::impulse_at((0.0, 0.0), 1.7, "flu", q).unwrap();
        let plume_src =
            SourceSpec::new((0.0, 0.0), 1.7, "flu", Emission::Continuous { qdot }).unwrap();
        for &(x, y) in &[(0.5f64, 0.0f64), (1.0, 0.0), (1.0, 0.1), (2.0, 0.2)] {
            assert!(med.wind_u * x / med.diffusivity_k >= 10.0);
            let p = Point3::new(x, y, 1.7);
            let horizon = 20.0 * x / med.wind_u;
            let n = 40_000usize;
            let dt = horizon / n as f64;
            let mut integral = 0.0;
            let mut prev = 0.0; // h(0+) -> 0 at any point away from the source
            for i in 1..=n {
                let t = i as f64 * dt;
                let h = puff_concentration(&puff_src, &med, p, t).unwrap();
                integral += 0.5 * (prev + h) * dt;
                prev = h;
            }
            let from_puff = integral * qdot / q;
            let direct = plume_concentration(&plume_src, &med, p).unwrap();
            let rel = (from_puff - direct).abs() / direct;
            assert!(rel <= 0.02, "x={x} y={y}: rel err {rel}");
        }
    }

    #[test]
    fn snapshot_rejects_oversized_grid() {
        let src = reference_impulse();
        let med = reference_medium();
        let huge = Axis::new(0.0, 1e-6, 10_000).unwrap();
        assert!(matches!(
            GridSpec::new(huge, huge, huge),
            Err(Error::ResourceLimit { .. })
        ));
        // A snapshot over an in-cap grid still works.
        let ok = GridSpec::new(
            Axis::new(0.0, 0.1, 4).unwrap(),
            Axis::new(0.0, 0.1, 4).unwrap(),
            Axis::new(0.0, 0.1, 4).unwrap(),
        )
        .unwrap();
        assert!(field_snapshot(&src, &med, &ok, 0.1).is_ok());
    }
}
