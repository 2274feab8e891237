use serde::{Deserialize, Serialize};
use texel_core::fabric::{program_weight_matrix, run_with, AerEvent, ChipConfig, DeviceConfig, LogKind, NetworkProgram};
use texel_core::memdevice::DeviceModel;
use texel_core::{rng, Binary};

use super::{ns, Experiment, Outputs};
use crate::error::Result;
use crate::exec::Context;
use crate::io::{jsonl_bytes, log_jsonl_bytes, weights_csv};
use crate::validate::{self, Report, Validate};

/// Programs a random weight matrix into the devices, runs inference with
/// learning off and reads the matrix back.
pub struct WeightsRoundtrip;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsConfig {
    pub mismatch_sigma: f64,
    pub devices: DeviceConfig,
    /// Probability that a weight is high.
    pub density: f64,
    /// Spacing between input spikes on consecutive synapses (s).
    pub input_interval_s: f64,
    pub t_end_s: f64,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        Self {
            mismatch_sigma: 0.0,
            devices: DeviceConfig {
                template: DeviceModel::new(1e9, 100e9, 100e-15).expect("valid device"),
                read: Default::default(),
                write: Default::default(),
                timing: Default::default(),
            },
            density: 0.5,
            input_interval_s: 1e-3,
            t_end_s: 0.1,
        }
    }
}

impl WeightsConfig {
    fn program(&self, chip: &ChipConfig, matrix: &[Vec<Binary>]) -> Result<NetworkProgram> {
        let mut p = NetworkProgram { learning: false, devices: Some(self.devices.clone()), ..Default::default() };
        program_weight_matrix(&mut p, chip, matrix)?;
        Ok(p)
    }
}

impl Validate for WeightsConfig {
    fn validate(&self, r: &mut Report) {
        let chip = ChipConfig { mismatch_sigma: self.mismatch_sigma, ..Default::default() };
        validate::chip(r, "mismatch_sigma", &chip);
        validate::device_config(r, "devices", &self.devices);
        if !(0.0..=1.0).contains(&self.density) {
            r.push("density", "must lie in [0, 1]");
        }
        if !(self.input_interval_s > self.devices.timing.read_width + self.devices.timing.turnaround) {
            r.push("input_interval_s", "must exceed one read pulse and its turnaround");
        }
        if !(self.t_end_s > self.input_interval_s * chip.plastic_per_neuron as f64) {
            r.push("t_end_s", "must leave room for one input per plastic synapse");
        }
    }
}

/// Seeded random weight matrix.
pub fn random_matrix(chip: &ChipConfig, density: f64, seed: u64) -> Vec<Vec<Binary>> {
    let mut r = rng::stream(seed, &[0x5747]);
    (0..chip.neurons())
        .map(|_| (0..chip.plastic_per_neuron).map(|_| Binary::from_bool(rng::uniform(&mut r) < density)).collect())
        .collect()
}

/// One input spike on every plastic synapse of every neuron, synapse `s` at `(s + 1)·interval`.
pub fn sweep_inputs(chip: &ChipConfig, interval: f64) -> Vec<AerEvent> {
    let mut out = Vec::with_capacity(chip.neurons() * chip.plastic_per_neuron);
    for s in 0..chip.plastic_per_neuron {
        for c in 0..chip.cores {
            for n in 0..chip.neurons_per_core {
                out.push(AerEvent::input(ns((s + 1) as f64 * interval), c as u8, n as u8, s as u8));
            }
        }
    }
    out
}

impl Experiment for WeightsRoundtrip {
    const NAME: &'static str = "weights-roundtrip";
    const CONFIG: &'static str = include_str!("../../configs/weights-roundtrip.toml");
    type Config = WeightsConfig;

    fn run(cfg: &WeightsConfig, ctx: &Context, out: &mut Outputs) -> Result<()> {
        let chip = ChipConfig { mismatch_sigma: cfg.mismatch_sigma, seed: ctx.seed, ..Default::default() };
        let matrix = random_matrix(&chip, cfg.density, ctx.seed);
        let program = cfg.program(&chip, &matrix)?;
        let inputs = sweep_inputs(&chip, cfg.input_interval_s);
        let run = run_with(&chip, &program, &inputs, ns(cfg.t_end_s), ctx.blocks())?;

        let mismatches = matrix.iter().zip(&run.final_weights).flat_map(|(a, b)| a.iter().zip(b)).filter(|(a, b)| a != b).count();
        out.check(mismatches == 0, || format!("{mismatches} weights differ after read-back"));
        let writes = run.count(|k| matches!(k, LogKind::WriteStart { .. } | LogKind::WeightChange { .. }));
        out.check(writes == 0, || format!("{writes} weight writes with learning off"));
        let reads = run.count(|k| matches!(k, LogKind::ReadDone { .. }));
        out.check(reads == inputs.len(), || format!("{reads} device reads for {} plastic inputs", inputs.len()));

        out.bytes("weights_programmed.csv", weights_csv(&matrix)?);
        out.bytes("weights_readback.csv", weights_csv(&run.final_weights)?);
        out.bytes("stimulus.jsonl", jsonl_bytes(&inputs)?);
        out.bytes("events.jsonl", log_jsonl_bytes(&run.log)?);
        Ok(())
    }
}
