//! Deterministic random number generation.
//!
//! The generator is a PCG-XSH-RR 64/32 permuted congruential generator,
//! fixed by its constants so that every language binding can replay the same
//! stream:
//!
//! * state update: `state = state * 6364136223846793005 + 1442695040888963407`
//!   (wrapping 64-bit arithmetic),
//! * output: `rotr32((((state >> 18) ^ state) >> 27) as u32, state >> 59)`
//!   computed from the pre-update state,
//! * seeding: `state = 0`, advance once, `state += seed`, advance once.
//!
//! `next_f64` consumes two 32-bit outputs (high word first) and keeps the top
//! 53 bits, giving a uniform deviate in `[0, 1)`. Gaussian deviates use the
//! Marsaglia polar method, which relies only on `sqrt` (exact under IEEE-754)
//! and `ln`, so streams are reproducible bit-for-bit per platform and stable
//! across mainstream libms.

const MULTIPLIER: u64 = 6364136223846793005;
const INCREMENT: u64 = 1442695040888963407;

/// Seeded, portable PCG-XSH-RR 64/32 stream.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
    spare_gaussian: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Rng {
        let mut rng = Rng { state: 0, spare_gaussian: None };
        rng.next_u32();
        rng.state = rng.state.wrapping_add(seed);
        rng.next_u32();
        rng
    }

    pub fn next_u32(&mut self) -> u32 {
        let old = self.state;
        self.state = old.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT);
        let xorshifted = (((old >> 18) ^ old) >> 27) as u32;
        let rot = (old >> 59) as u32;
        xorshifted.rotate_right(rot)
    }

    pub fn next_u64(&mut self) -> u64 {
        let hi = self.next_u32() as u64;
        let lo = self.next_u32() as u64;
        (hi << 32) | lo
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)`. `bound` must be nonzero.
    pub fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        (self.next_f64() * bound as f64) as usize % bound
    }

    /// Uniform in `[lo, hi)`.
    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// One standard-normal deviate (Marsaglia polar method, spare cached).
    pub fn gaussian(&mut self) -> f64 {
        if let Some(g) = self.spare_gaussian.take() {
            return g;
        }
        loop {
            let v1 = 2.0 * self.next_f64() - 1.0;
            let v2 = 2.0 * self.next_f64() - 1.0;
            let s = v1 * v1 + v2 * v2;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare_gaussian = Some(v2 * f);
                return v1 * f;
            }
        }
    }
}

/// `n` standard-normal deviates drawn from `rng`.
pub fn gaussian_sample(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gaussian()).collect()
}
