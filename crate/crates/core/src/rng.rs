//! Counter-based deterministic random numbers.
//!
//! Every draw is a pure function of `(seed, stream, step, slot)`, so noise
//! fields and Brownian increments are reproducible independently of
//! evaluation order. This is what makes parallel replicas bit-stable.
//!
//! The generator chains the splitmix64 finalizer over the key words. It is
//! not cryptographic; it only needs good avalanche behavior per counter.

/// Stream salts keep independent consumers of the same seed decorrelated.
pub mod streams {
    /// Space-time white noise increments of the SPDE integrator.
    pub const SPDE_NOISE: u64 = 0x5350_4445;
    /// Scalar Brownian increments for the SDE laboratory.
    pub const BROWNIAN: u64 = 0x4252_4f57;
    /// Per-replica seed derivation in the orchestrator.
    pub const REPLICA: u64 = 0x5245_504c;
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A 64-bit word fully determined by the key tuple.
#[inline]
pub fn counter_u64(seed: u64, stream: u64, step: u64, slot: u64) -> u64 {
    let mut h = mix64(seed ^ 0x9E37_79B9_7F4A_7C15);
    h = mix64(h ^ stream);
    h = mix64(h ^ step);
    mix64(h ^ slot)
}

/// Uniform draw in the open interval (0, 1).
#[inline]
fn uniform_open(word: u64) -> f64 {
    // (w + ½)/2^52 with w < 2^52: the half-integer is exactly representable,
    // so the result lies in [2^-53, 1 − 2^-53] without endpoint rounding.
    ((word >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Standard normal draw determined by `(seed, stream, step, slot)`.
///
/// Box-Muller on two counter words; only the cosine branch is used so that
/// one key maps to exactly one draw.
#[inline]
pub fn normal(seed: u64, stream: u64, step: u64, slot: u64) -> f64 {
    let u1 = uniform_open(counter_u64(seed, stream, step, slot.wrapping_mul(2)));
    let u2 = uniform_open(counter_u64(seed, stream, step, slot.wrapping_mul(2).wrapping_add(1)));
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Derived seed for replica `i` of a base seed, order-independent.
#[inline]
pub fn replica_seed(seed: u64, index: u64) -> u64 {
    counter_u64(seed, streams::REPLICA, index, 0)
}
