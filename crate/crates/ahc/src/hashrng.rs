//! Counter-based hashing used for all per-cell randomness.
//!
//! Every random quantity in a medium is a pure function of (seed, integer
//! counters), so shifting a lattice field by a lattice vector is exact
//! re-indexing and two media built from the same seed agree bit for bit.

/// SplitMix64 finalizer.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash a seed together with a list of integer counters.
pub fn hash(seed: u64, parts: &[u64]) -> u64 {
    let mut h = mix(seed ^ 0x517C_C1B7_2722_0A95);
    for &p in parts {
        h = mix(h ^ mix(p));
    }
    h
}

/// Uniform f64 in [0, 1) from a hash value.
#[inline]
pub fn to_unit(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in [0, n) from a hash value (Lemire reduction).
#[inline]
pub fn to_index(h: u64, n: usize) -> usize {
    ((h as u128 * n as u128) >> 64) as usize
}

/// Signed lattice coordinate reinterpreted as a counter.
#[inline]
pub fn coord(c: i64) -> u64 {
    c as u64
}

/// A tiny deterministic stream for test/demo sampling, built on the same mix.
pub struct HashStream {
    state: u64,
}

impl HashStream {
    pub fn new(seed: u64) -> Self {
        Self { state: mix(seed ^ 0xD6E8_FEB8_6659_FD93) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix(self.state)
    }

    pub fn next_unit(&mut self) -> f64 {
        to_unit(self.next_u64())
    }

    /// Uniform in [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_unit()
    }

    #[cfg(test)]
    pub fn next_index(&mut self, n: usize) -> usize {
        to_index(self.next_u64(), n)
    }
}
