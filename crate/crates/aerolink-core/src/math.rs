//! Float math shims: `std` intrinsics when available, `libm` otherwise.
//!
//! Special functions without a `std` counterpart (`erfc`, `ln_gamma`) always
//! come from `libm`.

#[cfg(feature = "std")]
mod imp {
    #[inline]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    #[inline]
    pub fn powf(x: f64, y: f64) -> f64 {
        x.powf(y)
    }
    #[inline]
    pub fn floor(x: f64) -> f64 {
        x.floor()
    }
    #[inline]
    pub fn ceil(x: f64) -> f64 {
        x.ceil()
    }
}

#[cfg(not(feature = "std"))]
mod imp {
    #[inline]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[inline]
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }
    #[inline]
    pub fn floor(x: f64) -> f64 {
        libm::floor(x)
    }
    #[inline]
    pub fn ceil(x: f64) -> f64 {
        libm::ceil(x)
    }
}

pub(crate) use imp::{ceil, exp, floor, ln, powf, sqrt};

/// Complementary error function.
#[inline]
pub(crate) fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Natural log of the gamma function, `ln Γ(x)`.
#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Neumaier-compensated sum. Used wherever a plain `f64` accumulation over
/// many cells would eat into tight conservation tolerances.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        // 1 followed by many tiny values that a naive sum drops entirely.
        let n = 100_000usize;
        let tiny = 1e-18;
        let values = core::iter::once(1.0).chain(core::iter::repeat_n(tiny, n));
        let exact = 1.0 + tiny * n as f64;
        assert!((compensated_sum(values) - exact).abs() < 1e-16);
    }

    #[test]
    fn erfc_reference_points() {
        assert!((erfc(0.0) - 1.0).abs() < 1e-15);
        // erfc(1) = 0.15729920705028513...
        assert!((erfc(1.0) - 0.157_299_207_050_285_13).abs() < 1e-14);
    }

    #[test]
    fn ln_gamma_factorials() {
        // ln Γ(n+1) = ln n!
        assert!((ln_gamma(5.0) - (24.0f64).ln()).abs() < 1e-12);
        assert!((ln_gamma(11.0) - (3_628_800.0f64).ln()).abs() < 1e-11);
    }
}
