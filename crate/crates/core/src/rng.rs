//! Seeded randomness: stream derivation, Poisson spike trains and normal draws.
//!
//! All randomness flows from a `u64` seed through [`derive_seed`], so a cell of
//! a sweep or an address on the chip always sees the same stream no matter
//! which worker evaluates it.

use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a path of stream identifiers.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn uniform<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Unit-mean exponential draw.
pub fn exponential<R: RngCore>(rng: &mut R) -> f64 {
    -libm::log1p(-uniform(rng))
}

/// Standard normal draw (Box–Muller, one value per call).
pub fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
}

/// Homogeneous Poisson spike times in `[start, end)`.
pub fn poisson_train<R: RngCore>(rng: &mut R, rate: f64, start: f64, end: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(rate > 0.0) || end <= start {
        return out;
    }
    let mut t = start + exponential(rng) / rate;
    while t < end {
        out.push(t);
        t += exponential(rng) / rate;
    }
    out
}

/// A Poisson process at `max_rate` with a uniform mark per event.
///
/// Keeping events whose mark is below `rate / max_rate` thins it to an exact
/// Poisson process at `rate`; trains at different rates drawn from one source
/// are nested, which couples neighbouring cells of a rate sweep.
#[derive(Debug, Clone)]
pub struct ThinnedPoisson {
    events: Vec<(f64, f64)>,
    max_rate: f64,
}

impl ThinnedPoisson {
    pub fn new<R: RngCore>(rng: &mut R, max_rate: f64, start: f64, end: f64) -> Self {
        let times = poisson_train(rng, max_rate, start, end);
        let events = times.into_iter().map(|t| (t, uniform(rng))).collect();
        Self { events, max_rate }
    }

    pub fn at_rate(&self, rate: f64) -> Vec<f64> {
        if !(rate > 0.0) {
            return Vec::new();
        }
        let keep = rate / self.max_rate;
        self.events.iter().filter(|(_, m)| *m < keep).map(|(t, _)| *t).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, &[1, 2]), |r, _| Some(r.next_u64())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, &[1, 2]), |r, _| Some(r.next_u64())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, &[2, 1]), |r, _| Some(r.next_u64())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn poisson_rate_is_close_to_nominal() {
        let mut r = stream(1, &[]);
        let n = poisson_train(&mut r, 200.0, 0.0, 100.0).len() as f64;
        // 20 000 expected, sd ≈ 141
        assert!((n - 20_000.0).abs() < 600.0, "{n}");
    }

    #[test]
    fn thinned_trains_are_nested() {
        let mut r = stream(3, &[]);
        let src = ThinnedPoisson::new(&mut r, 100.0, 0.0, 10.0);
        let lo = src.at_rate(10.0);
        let hi = src.at_rate(50.0);
        assert!(lo.iter().all(|t| hi.contains(t)));
        assert!(src.at_rate(0.0).is_empty());
        assert_eq!(src.at_rate(100.0).len(), src.events.len());
    }

    #[test]
    fn normal_draws_have_unit_variance() {
        let mut r = stream(11, &[]);
        let xs: Vec<f64> = (0..20_000).map(|_| standard_normal(&mut r)).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.03 && (var - 1.0).abs() < 0.05);
    }
}
