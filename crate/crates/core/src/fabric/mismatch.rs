//! Per-instance device mismatch as multiplicative log-normal factors.

use super::topology::NeuronAddr;
use crate::neuron::NeuronParams;
use crate::rng;

const CORE_STREAM: u64 = 0xC0DE;
const NEURON_STREAM: u64 = 0x4E55;

/// Median-one log-normal factor `exp(σ·z)` for a stream path.
pub fn factor(seed: u64, sigma: f64, path: &[u64]) -> f64 {
    if sigma == 0.0 {
        return 1.0;
    }
    libm::exp(sigma * rng::standard_normal(&mut rng::stream(seed, path)))
}

/// Applies core-level and neuron-level factors to the input coupling and the
/// leak time constant of a neuron.
pub fn apply(params: &NeuronParams, addr: NeuronAddr, seed: u64, sigma: f64) -> NeuronParams {
    let core = addr.core as u64;
    let flat = addr.flat() as u64;
    let gain = factor(seed, sigma, &[CORE_STREAM, core, 0]) * factor(seed, sigma, &[NEURON_STREAM, flat, 0]);
    let leak = factor(seed, sigma, &[CORE_STREAM, core, 1]) * factor(seed, sigma, &[NEURON_STREAM, flat, 1]);
    NeuronParams { gain_in: params.gain_in * gain, tau_mem: params.tau_mem * leak, ..*params }
}
