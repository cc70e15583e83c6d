//! Deterministic, splittable random streams.
//!
//! Every stochastic element of the simulator (a tracked particle, a detection
//! window, an emission event) owns its own generator, derived from the master
//! seed and the element's index. Results therefore never depend on execution
//! order or thread count.
//!
//! Fixed derivation scheme (stable across releases; the test suite freezes
//! values drawn from it):
//!
//! 1. `x = seed ⊕ (index + 1) · 0x9E3779B97F4A7C15` (golden-ratio constant),
//! 2. two SplitMix64 finalizer steps give 64 bits each,
//! 3. the 128-bit concatenation seeds a PCG-64 MCG (`Pcg64Mcg`,
//!    XSL-RR 128/64) from the `rand_pcg` crate.

use rand_pcg::Pcg64Mcg;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer (Vigna). Bijective on u64.
#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator for logical stream `index` of master seed `seed`.
pub fn stream(seed: u64, index: u64) -> Pcg64Mcg {
    let x = seed ^ GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1));
    let hi = splitmix64(x);
    let lo = splitmix64(hi ^ x);
    Pcg64Mcg::new(((hi as u128) << 64) | lo as u128)
}

/// A derived sub-seed for nested components that need their own stream
/// families (e.g. the stochastic channel backend inside a scenario).
pub fn sub_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ GOLDEN_GAMMA.wrapping_mul(tag.wrapping_add(0x5EED)))
}
