use serde::{Deserialize, Serialize};
use texel_core::energy::{power_vs_rate, tally_log, EnergyCoefficients, EnergyReport, Operation, PowerPoint, Supply};
use texel_core::fabric::{run_with, ChipConfig, NetworkProgram};
use texel_core::neuron::NeuronParams;

use super::{linspace, ns, Experiment, Outputs};
use crate::error::Result;
use crate::exec::Context;
use crate::row;
use crate::validate::{self, Report, Validate};

/// Power against event rate, plus a ledger over a simulated chip run.
pub struct Power;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerConfig {
    pub coefficients: EnergyCoefficients,
    pub rate_max_hz: f64,
    pub rate_steps: usize,
    /// Neurons that spike at the swept rate.
    pub spike_population: f64,
    /// Synapses that receive events at the swept rate.
    pub synop_population: f64,
    /// Rate at which the per-spike energy is read off the curve.
    pub anchor_rate_hz: f64,
    /// DC drive for the simulated run; none when empty.
    pub chip_dc_a: Vec<f64>,
    pub chip_duration_s: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            coefficients: EnergyCoefficients::default(),
            rate_max_hz: 200.0,
            rate_steps: 21,
            spike_population: 1.0,
            synop_population: 1.0,
            anchor_rate_hz: 80.0,
            chip_dc_a: vec![0.0, 1e-9, 2e-9],
            chip_duration_s: 0.5,
        }
    }
}

impl Validate for PowerConfig {
    fn validate(&self, r: &mut Report) {
        if let Err(e) = self.coefficients.validate() {
            r.push("coefficients", e.to_string());
        }
        if !(self.rate_max_hz > 0.0) || self.rate_steps < 3 {
            r.push("rate_steps", "need rate_max_hz > 0 and at least 3 steps");
        }
        if !(self.spike_population > 0.0 && self.synop_population > 0.0) {
            r.push("spike_population", "populations must be positive");
        }
        if !(self.anchor_rate_hz > 0.0) {
            r.push("anchor_rate_hz", "must be positive");
        }
        if !(self.chip_duration_s > 0.0) {
            r.push("chip_duration_s", "must be positive");
        }
        for (k, &dc) in self.chip_dc_a.iter().enumerate() {
            validate::neuron(r, &format!("chip_dc_a[{k}]"), &NeuronParams { i_dc: dc, ..Default::default() });
        }
    }
}

/// Largest second difference of a sampled curve relative to its range; zero
/// for an affine curve on an even grid.
pub fn curvature(values: &[f64]) -> f64 {
    let range = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if range == 0.0 {
        return 0.0;
    }
    values.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]).abs()).fold(0.0, f64::max) / range
}

/// Per-event energy read off a curve: dynamic power over event rate.
pub fn energy_from_curve(p: &PowerPoint, population: f64) -> Option<f64> {
    (p.rate > 0.0).then(|| p.dynamic_power.analog / (p.rate * population))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ChipRun {
    dc_a: f64,
    report: EnergyReport,
}

fn curve_rows<'a>(name: &'a str, curve: &'a [PowerPoint]) -> impl Iterator<Item = Vec<String>> + 'a {
    curve.iter().flat_map(move |p| {
        Supply::ALL.into_iter().map(move |s| {
            let mut r = row![name, p.rate, s.name(), p.dynamic_power.get(s), p.total_power.get(s), p.dynamic_per_event.get(s)];
            r.push(p.total_per_event.map(|e| row![e.get(s)].remove(0)).unwrap_or_default());
            r
        })
    })
}

impl Experiment for Power {
    const NAME: &'static str = "power";
    const CONFIG: &'static str = include_str!("../../configs/power.toml");
    type Config = PowerConfig;

    fn run(cfg: &PowerConfig, ctx: &Context, out: &mut Outputs) -> Result<()> {
        let c = &cfg.coefficients;
        let rates = linspace(0.0, cfg.rate_max_hz, cfg.rate_steps);
        let spikes = power_vs_rate(c, Operation::Spike, cfg.spike_population, &rates)?;
        let synops = power_vs_rate(c, Operation::Synop, cfg.synop_population, &rates)?;
        for (name, curve) in [("spike", &spikes), ("synop", &synops)] {
            for s in Supply::ALL {
                let total: Vec<f64> = curve.iter().map(|p| p.total_power.get(s)).collect();
                let k = curvature(&total);
                out.check(k < 1e-9, || format!("{name} curve for {} supply is not affine ({k:e})", s.name()));
                out.check(total.windows(2).all(|w| w[1] >= w[0]), || format!("{name} power falls with rate"));
            }
        }
        let anchor = power_vs_rate(c, Operation::Spike, cfg.spike_population, &[cfg.anchor_rate_hz])?;
        let e = energy_from_curve(&anchor[0], cfg.spike_population).expect("positive anchor rate");
        out.check(((e - c.e_spike.analog) / c.e_spike.analog).abs() < 1e-12, || {
            format!("analog energy per spike at {} Hz is {e:e} J", cfg.anchor_rate_hz)
        });

        let header =
            ["operation", "rate_hz", "supply", "dynamic_power_w", "total_power_w", "dynamic_per_event_j", "total_per_event_j"];
        out.csv("power_vs_rate.csv", &header, curve_rows("spike", &spikes).chain(curve_rows("synop", &synops)))?;
        out.csv(
            "power_static.csv",
            &["supply", "p_static_w", "e_spike_j", "e_synop_j"],
            Supply::ALL.iter().map(|&s| row![s.name(), c.p_static.get(s), c.e_spike.get(s), c.e_synop.get(s)]),
        )?;

        let chip = ChipConfig { seed: ctx.seed, ..Default::default() };
        let runs = cfg
            .chip_dc_a
            .iter()
            .map(|&dc| -> Result<ChipRun> {
                let program = NetworkProgram { neuron: NeuronParams { i_dc: dc, ..Default::default() }, ..Default::default() };
                let run = run_with(&chip, &program, &[], ns(cfg.chip_duration_s), ctx.blocks())?;
                Ok(ChipRun { dc_a: dc, report: tally_log(&run.log, c, cfg.chip_duration_s)? })
            })
            .collect::<Result<Vec<_>>>()?;
        for r in &runs {
            let p = &r.report;
            let sum = p.static_energy + p.dynamic_energy;
            out.check((sum.total() - p.total_energy.total()).abs() <= 1e-15 * p.total_energy.total(), || {
                format!("supply decomposition does not sum at dc {:e} A", r.dc_a)
            });
        }
        out.json("power_chip.json", &runs)
    }
}
