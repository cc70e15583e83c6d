//! Regular grids, sampled concentration fields and time series.
//!
//! Fields are cell-centered: cell `i` of an [`Axis`] spans
//! `[min + i·step, min + (i+1)·step)` and its value is attributed to the cell
//! center. Storage is row-major with x fastest:
//! `index = (iz · ny + iy) · nx + ix`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{ensure_finite, Error, Result};
use crate::math;

/// Hard cap on cells per field; larger requests are a configuration error.
pub const MAX_GRID_CELLS: u128 = 100_000_000;

/// One grid axis: `n` cells of width `step` starting at `min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub step: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, step: f64, n: usize) -> Result<Self> {
        ensure_finite("axis.min", min)?;
        ensure_finite("axis.step", step)?;
        if step <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "axis.step",
                reason: "must be > 0",
            });
        }
        Ok(Self { min, step, n })
    }

    /// Axis covering `[lo, hi]` with cells no wider than `step`.
    pub fn covering(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if hi.is_nan() || lo.is_nan() || hi < lo {
            return Err(Error::InvalidParameter {
                name: "axis",
                reason: "upper bound must be >= lower bound",
            });
        }
        let n = if hi == lo {
            0
        } else {
            math::ceil((hi - lo) / step) as usize
        };
        Self::new(lo, step, n)
    }

    /// Degenerate single-cell axis pinned at `value` (used for plane cuts).
    pub fn pinned(value: f64, step: f64) -> Result<Self> {
        Self::new(value - 0.5 * step, step, 1)
    }

    #[inline]
    pub fn center(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.step
    }

    #[inline]
    pub fn max(&self) -> f64 {
        self.min + self.step * self.n as f64
    }

    /// Cell index containing `x`, or `None` outside `[min, max)`.
    #[inline]
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        if x.is_nan() || x < self.min {
            return None;
        }
        let i = math::floor((x - self.min) / self.step) as usize;
        if i < self.n {
            Some(i)
        } else {
            None
        }
    }
}

/// A 3-D sampling lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x: Axis,
    pub y: Axis,
    pub z: Axis,
}

impl GridSpec {
    pub fn new(x: Axis, y: Axis, z: Axis) -> Result<Self> {
        let cells = x.n as u128 * y.n as u128 * z.n as u128;
        if cells > MAX_GRID_CELLS {
            return Err(Error::ResourceLimit {
                what: "grid cells",
                requested: cells,
                cap: MAX_GRID_CELLS,
            });
        }
        Ok(Self { x, y, z })
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.x.n * self.y.n * self.z.n
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.x.step * self.y.step * self.z.step
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (iz * self.y.n + iy) * self.x.n + ix
    }

    /// Cell center of linear index `idx`.
    pub fn center(&self, idx: usize) -> (f64, f64, f64) {
        let ix = idx % self.x.n;
        let iy = (idx / self.x.n) % self.y.n;
        let iz = idx / (self.x.n * self.y.n);
        (self.x.center(ix), self.y.center(iy), self.z.center(iz))
    }
}

/// A concentration field sampled on a [`GridSpec`] at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationField {
    pub grid: GridSpec,
    /// particles/m³ per cell, x-fastest layout.
    pub values: Vec<f64>,
    /// Simulation time of the snapshot, s.
    pub time: f64,
    pub species: String,
}

impl ConcentrationField {
    pub fn new(
        grid: GridSpec,
        values: Vec<f64>,
        time: f64,
        species: impl Into<String>,
    ) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: "length must equal grid cell count",
            });
        }
        for &v in &values {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter {
                    name: "values",
                    reason: "must be finite and non-negative",
                });
            }
        }
        Ok(Self {
            grid,
            values,
            time,
            species: species.into(),
        })
    }

    /// All-zero field.
    pub fn zeros(grid: GridSpec, time: f64, species: impl Into<String>) -> Self {
        Self {
            grid,
            values: alloc::vec![0.0; grid.cell_count()],
            time,
            species: species.into(),
        }
    }

    /// Peak value and the center coordinates of the peak cell.
    /// Returns `None` for an empty field.
    pub fn peak(&self) -> Option<(f64, (f64, f64, f64))> {
        let (idx, &v) = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        Some((v, self.grid.center(idx)))
    }

    /// Total aerosol count represented by the field (compensated sum of
    /// value × cell volume).
    pub fn total_mass(&self) -> f64 {
        math::compensated_sum(self.values.iter().copied()) * self.grid.cell_volume()
    }

    /// Mean and standard deviation of the named coordinate under the field
    /// values as weights. Used for lateral-spread moment fits.
    pub fn moment_std(&self, axis: MomentAxis) -> Option<(f64, f64)> {
        let mut w_sum = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (idx, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let (cx, cy, cz) = self.grid.center(idx);
            let c = match axis {
                MomentAxis::X => cx,
                MomentAxis::Y => cy,
                MomentAxis::Z => cz,
            };
            w_sum += v;
            m1 += v * c;
            m2 += v * c * c;
        }
        if w_sum <= 0.0 {
            return None;
        }
        let mean = m1 / w_sum;
        let var = (m2 / w_sum - mean * mean).max(0.0);
        Some((mean, math::sqrt(var)))
    }

    /// Aggregate `factor³` fine cells into one coarse cell by averaging.
    /// Every axis length must be divisible by `factor`.
    pub fn block_average(&self, factor: usize) -> Result<ConcentrationField> {
        if factor == 0
            || !self.grid.x.n.is_multiple_of(factor)
            || !self.grid.y.n.is_multiple_of(factor)
            || !self.grid.z.n.is_multiple_of(factor)
        {
            return Err(Error::InvalidParameter {
                name: "factor",
                reason: "axis lengths must be divisible by the block factor",
            });
        }
        let coarse = GridSpec::new(
            Axis::new(
                self.grid.x.min,
                self.grid.x.step * factor as f64,
                self.grid.x.n / factor,
            )?,
            Axis::new(
                self.grid.y.min,
                self.grid.y.step * factor as f64,
                self.grid.y.n / factor,
            )?,
            Axis::new(
                self.grid.z.min,
                self.grid.z.step * factor as f64,
                self.grid.z.n / factor,
            )?,
        )?;
        let mut values = alloc::vec![0.0f64; coarse.cell_count()];
        let inv = 1.0 / (factor * factor * factor) as f64;
        for iz in 0..self.grid.z.n {
            for iy in 0..self.grid.y.n {
                for ix in 0..self.grid.x.n {
                    let v = self.values[self.grid.index(ix, iy, iz)];
                    values[coarse.index(ix / factor, iy / factor, iz / factor)] += v * inv;
                }
            }
        }
        Ok(ConcentrationField {
            grid: coarse,
            values,
            time: self.time,
            species: self.species.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentAxis {
    X,
    Y,
    Z,
}

/// Concentration over time at one probe point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub species: String,
}

impl ConcentrationSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, species: impl Into<String>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidParameter {
                name: "series",
                reason: "times and values must have equal length",
            });
        }
        let mut prev = f64::NEG_INFINITY;
        for &t in &times {
            ensure_finite("series.times", t)?;
            if t <= prev {
                return Err(Error::NonMonotonicTimes {
                    context: "concentration series",
                });
            }
            prev = t;
        }
        for &v in &values {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter {
                    name: "series.values",
                    reason: "must be finite and non-negative",
                });
            }
        }
        Ok(Self {
            times,
            values,
            species: species.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the maximum value (first occurrence).
    pub fn argmax(&self) -> Option<usize> {
        self.values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
    }

    /// Trapezoidal integral of the series restricted to `[a, b]`, with linear
    /// interpolation at the window edges.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        let (first, last) = match (self.times.first(), self.times.last()) {
            (Some(&f), Some(&l)) => (f, l),
            _ => (f64::NAN, f64::NAN),
        };
        // NaN first/last (empty series) must land here too.
        if first.is_nan() || last.is_nan() || b <= a || a < first || b > last {
            return Err(Error::WindowNotCovered {
                window_start: a,
                window_end: b,
                series_start: first,
                series_end: last,
            });
        }
        let value_at = |t: f64, hi: usize| -> f64 {
            // hi is the first index with times[hi] >= t; interpolate from hi-1.
            if self.times[hi] == t || hi == 0 {
                self.values[hi]
            } else {
                let (t0, t1) = (self.times[hi - 1], self.times[hi]);
                let (v0, v1) = (self.values[hi - 1], self.values[hi]);
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        };
        let lo_idx = self.times.partition_point(|&t| t < a);
        let hi_idx = self.times.partition_point(|&t| t < b);
        let va = value_at(a, lo_idx);
        let vb = value_at(b, hi_idx.min(self.len() - 1));
        let mut sum = 0.0;
        let mut prev_t = a;
        let mut prev_v = va;
        for i in lo_idx..hi_idx {
            if self.times[i] <= a {
                continue;
            }
            sum += 0.5 * (prev_v + self.values[i]) * (self.times[i] - prev_t);
            prev_t = self.times[i];
            prev_v = self.values[i];
        }
        sum += 0.5 * (prev_v + vb) * (b - prev_t);
        Ok(sum)
    }
}

/// RMSE between two fields on the same grid, normalized by the peak of
/// `reference`, over cells where `reference ≥ mask_fraction · peak`.
///
/// Returns the relative RMSE and the number of cells compared.
pub fn masked_rmse(
    reference: &ConcentrationField,
    other: &ConcentrationField,
    mask_fraction: f64,
) -> Result<(f64, usize)> {
    if reference.grid != other.grid {
        return Err(Error::InvalidParameter {
            name: "fields",
            reason: "grids must match for comparison",
        });
    }
    let peak = reference.values.iter().copied().fold(0.0f64, f64::max);
    if peak <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "reference",
            reason: "reference field is identically zero",
        });
    }
    let floor = peak * mask_fraction;
    let mut acc = 0.0;
    let mut n = 0usize;
    for (r, o) in reference.values.iter().zip(&other.values) {
        if *r >= floor {
            let d = r - o;
            acc += d * d;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "mask_fraction",
            reason: "mask selected no cells",
        });
    }
    Ok((math::sqrt(acc / n as f64) / peak, n))
}

/// Relative L2 error `‖a − b‖₂ / ‖b‖₂` over the whole grid.
pub fn l2_relative_error(a: &ConcentrationField, b: &ConcentrationField) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::InvalidParameter {
            name: "fields",
            reason: "grids must match for comparison",
        });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.values.iter().zip(&b.values) {
        num += (x - y) * (x - y);
        den += y * y;
    }
    if den == 0.0 {
        return Err(Error::InvalidParameter {
            name: "b",
            reason: "reference field is identically zero",
        });
    }
    Ok(math::sqrt(num / den))
}
