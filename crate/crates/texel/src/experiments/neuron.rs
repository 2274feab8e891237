use serde::{Deserialize, Serialize};
use texel_core::fabric::{run_with, ChipConfig, NetworkProgram};
use texel_core::neuron::{poisson_drive, step_response, NeuronParams, StaticSynapse, StepResponse};

use super::{linspace, ns, Experiment, Outputs};
use crate::error::Result;
use crate::exec::Context;
use crate::row;
use crate::validate::{self, Report, Validate};

/// DC sweep over every neuron of the chip.
pub struct FiCurve;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiCurveConfig {
    pub neuron: NeuronParams,
    pub mismatch_sigma: f64,
    pub dc_min_a: f64,
    pub dc_max_a: f64,
    pub dc_steps: usize,
    pub warmup_s: f64,
    pub duration_s: f64,
}

impl Default for FiCurveConfig {
    fn default() -> Self {
        Self {
            neuron: NeuronParams::default(),
            mismatch_sigma: 0.1,
            dc_min_a: 0.0,
            dc_max_a: 3e-9,
            dc_steps: 16,
            warmup_s: 0.2,
            duration_s: 1.0,
        }
    }
}

impl Validate for FiCurveConfig {
    fn validate(&self, r: &mut Report) {
        validate::neuron(r, "neuron", &self.neuron);
        validate::chip(r, "mismatch_sigma", &ChipConfig { mismatch_sigma: self.mismatch_sigma, ..Default::default() });
        if !(self.dc_min_a >= 0.0 && self.dc_max_a >= self.dc_min_a && self.dc_max_a.is_finite()) {
            r.push("dc_max_a", "need 0 ≤ dc_min_a ≤ dc_max_a");
        }
        if self.dc_steps == 0 {
            r.push("dc_steps", "need at least one step");
        }
        if !(self.warmup_s >= 0.0) {
            r.push("warmup_s", "must be non-negative");
        }
        if !(self.duration_s > 0.0) {
            r.push("duration_s", "must be positive");
        }
    }
}

impl Experiment for FiCurve {
    const NAME: &'static str = "fi-curve";
    const CONFIG: &'static str = include_str!("../../configs/fi-curve.toml");
    type Config = FiCurveConfig;

    fn run(cfg: &FiCurveConfig, ctx: &Context, out: &mut Outputs) -> Result<()> {
        let chip = ChipConfig { mismatch_sigma: cfg.mismatch_sigma, seed: ctx.seed, ..Default::default() };
        let n = chip.neurons();
        let dcs = linspace(cfg.dc_min_a, cfg.dc_max_a, cfg.dc_steps);
        let t_end = ns(cfg.warmup_s + cfg.duration_s);
        let warmup = ns(cfg.warmup_s);
        // One full-chip run per DC level; blocks within a run are serial.
        let rates: Vec<Vec<f64>> = ctx.map(dcs.len(), |k| -> Result<Vec<f64>> {
            let program = NetworkProgram { neuron: NeuronParams { i_dc: dcs[k], ..cfg.neuron }, ..Default::default() };
            let run = run_with(&chip, &program, &[], t_end, texel_core::fabric::serial_blocks)?;
            let mut counts = vec![0u64; n];
            for e in run.output_spikes().iter().filter(|e| e.t_ns >= warmup) {
                counts[e.core as usize * chip.neurons_per_core + e.neuron as usize] += 1;
            }
            Ok(counts.into_iter().map(|c| c as f64 / cfg.duration_s).collect())
        })?;
        for k in 1..dcs.len() {
            for (id, (&a, &b)) in rates[k - 1].iter().zip(&rates[k]).enumerate() {
                out.check(b >= a, || format!("neuron {id}: rate falls from {a} Hz to {b} Hz at dc {:e} A", dcs[k]));
            }
        }
        let rows = dcs.iter().enumerate().flat_map(|(k, dc)| {
            let rates = &rates[k];
            (0..n).map(move |id| row![dc * 1e12, id, rates[id]])
        });
        out.csv("fi_curve.csv", &["dc_pA", "neuron_id", "rate_hz"], rows)
    }
}

/// DC step into an adapting neuron.
pub struct StepAdaptation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepConfig {
    pub neuron: NeuronParams,
    pub dc_a: f64,
    pub onset_s: f64,
    pub t_end_s: f64,
    pub sample_dt_s: f64,
    /// Tolerance for the settled rate relative to the plateau.
    pub plateau_tolerance: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            neuron: NeuronParams { ahp_jump: 0.05e-9, ..Default::default() },
            dc_a: 2e-9,
            onset_s: 0.1,
            t_end_s: 2.1,
            sample_dt_s: 1e-4,
            plateau_tolerance: 0.05,
        }
    }
}

impl Validate for StepConfig {
    fn validate(&self, r: &mut Report) {
        validate::neuron(r, "neuron", &self.neuron);
        if !(self.onset_s >= 0.0 && self.t_end_s > self.onset_s) {
            r.push("t_end_s", "need 0 ≤ onset_s < t_end_s");
        }
        if !(self.sample_dt_s > 0.0) {
            r.push("sample_dt_s", "must be positive");
        }
    }
}

/// Checks the adaptation shape: first ISI shorter than the steady ISI and an
/// instantaneous rate that never rises and ends within `tol` of its plateau.
pub fn adaptation_shape(resp: &StepResponse, tol: f64) -> std::result::Result<(), String> {
    let isis = resp.isis();
    if isis.len() < 6 {
        return Err(format!("only {} spikes", resp.spikes.len()));
    }
    let tail = &isis[isis.len() - 5..];
    let steady = tail.iter().sum::<f64>() / tail.len() as f64;
    if isis[0] >= steady {
        return Err(format!("first ISI {} s not shorter than steady ISI {steady} s", isis[0]));
    }
    let rates = resp.instantaneous_rate();
    if let Some(w) = rates.windows(2).find(|w| w[1].1 > w[0].1 * (1.0 + 1e-9)) {
        return Err(format!("rate rises from {} Hz to {} Hz at t = {} s", w[0].1, w[1].1, w[1].0));
    }
    let plateau = 1.0 / steady;
    let last = rates.last().expect("several spikes").1;
    if (last - plateau).abs() > tol * plateau {
        return Err(format!("final rate {last} Hz not within {tol} of plateau {plateau} Hz"));
    }
    Ok(())
}

impl Experiment for StepAdaptation {
    const NAME: &'static str = "step-adaptation";
    const CONFIG: &'static str = include_str!("../../configs/step-adaptation.toml");
    type Config = StepConfig;

    fn run(cfg: &StepConfig, _ctx: &Context, out: &mut Outputs) -> Result<()> {
        let resp = step_response(&cfg.neuron, cfg.dc_a, cfg.onset_s, cfg.t_end_s, cfg.sample_dt_s)?;
        if let Err(msg) = adaptation_shape(&resp, cfg.plateau_tolerance) {
            out.violations.push(format!("adaptation: {msg}"));
        }
        out.csv("step_trace.csv", &["t_ns", "i_mem_a", "i_ahp_a"], resp.trace.iter().map(|&(t, m, a)| row![ns(t), m, a]))?;
        let rows = resp.spikes.iter().enumerate().map(|(k, &t)| {
            let mut r = row![k, ns(t)];
            if k == 0 {
                r.extend([String::new(), String::new()]);
            } else {
                let isi = t - resp.spikes[k - 1];
                r.extend(row![isi, 1.0 / isi]);
            }
            r
        });
        out.csv("step_spikes.csv", &["spike", "t_ns", "isi_s", "rate_hz"], rows)
    }
}

/// Poisson input through one static synapse.
pub struct PoissonDrive;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoissonConfig {
    pub neuron: NeuronParams,
    pub synapse: StaticSynapse,
    pub rate_hz: f64,
    pub duration_s: f64,
    pub sample_dt_s: f64,
}

impl Default for PoissonConfig {
    fn default() -> Self {
        Self {
            neuron: NeuronParams::default(),
            synapse: StaticSynapse { weight: 0.3e-9, tau_syn: 5e-3 },
            rate_hz: 200.0,
            duration_s: 1.0,
            sample_dt_s: 1e-4,
        }
    }
}

impl Validate for PoissonConfig {
    fn validate(&self, r: &mut Report) {
        validate::neuron(r, "neuron", &self.neuron);
        if !(self.synapse.weight >= 0.0 && self.synapse.tau_syn > 0.0) {
            r.push("synapse", "need weight ≥ 0 and tau_syn > 0");
        }
        if !(self.rate_hz >= 0.0 && self.duration_s > 0.0 && self.sample_dt_s > 0.0) {
            r.push("rate_hz", "need rate ≥ 0, duration > 0 and sample_dt > 0");
        }
    }
}

impl Experiment for PoissonDrive {
    const NAME: &'static str = "poisson-drive";
    const CONFIG: &'static str = include_str!("../../configs/poisson-drive.toml");
    type Config = PoissonConfig;

    fn run(cfg: &PoissonConfig, ctx: &Context, out: &mut Outputs) -> Result<()> {
        let resp = poisson_drive(&cfg.neuron, &cfg.synapse, cfg.rate_hz, ctx.seed, cfg.duration_s, cfg.sample_dt_s)?;
        if let Some(&first_pre) = resp.pre_spikes.first() {
            out.check(resp.post_spikes.first().is_none_or(|&t| t > first_pre), || {
                "output spike before the first input spike".into()
            });
        } else {
            out.check(resp.post_spikes.is_empty(), || "output spikes without input".into());
        }
        out.csv("poisson_trace.csv", &["t_ns", "i_mem_a", "i_syn_a"], resp.trace.iter().map(|&(t, m, s)| row![ns(t), m, s]))?;
        let mut spikes: Vec<(u64, &str)> = resp.pre_spikes.iter().map(|&t| (ns(t), "pre")).collect();
        spikes.extend(resp.post_spikes.iter().map(|&t| (ns(t), "post")));
        spikes.sort();
        out.csv("poisson_spikes.csv", &["t_ns", "source"], spikes.into_iter().map(|(t, s)| row![t, s]))
    }
}
