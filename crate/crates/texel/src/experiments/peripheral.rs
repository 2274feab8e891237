use serde::{Deserialize, Serialize};
use texel_core::fabric::{
    dac_current, sadc_events, sadc_rate, sadc_reconstruct, DacChannel, Polarity, SadcConfig, MASTER_CURRENTS,
};

use super::{logspace, Experiment, Outputs};
use crate::error::Result;
use crate::exec::Context;
use crate::row;
use crate::validate::{Report, Validate};

/// sADC transfer curve over a log current sweep.
pub struct SadcCurve;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SadcCurveConfig {
    pub sadc: SadcConfig,
    /// Input currents `10^min_exp ..= 10^max_exp` A.
    pub min_exp: i32,
    pub max_exp: i32,
    pub per_decade: u32,
    /// Simulated window per current (s).
    pub duration_s: f64,
    /// Largest relative error of the ISI reconstruction.
    pub reconstruct_tolerance: f64,
}

impl Default for SadcCurveConfig {
    fn default() -> Self {
        Self {
            sadc: SadcConfig::default(),
            min_exp: -12,
            max_exp: -9,
            per_decade: 10,
            duration_s: 1.0,
            reconstruct_tolerance: 0.01,
        }
    }
}

impl Validate for SadcCurveConfig {
    fn validate(&self, r: &mut Report) {
        if let Err(e) = self.sadc.validate() {
            r.push("sadc", e.to_string());
        }
        if self.per_decade == 0 || self.max_exp < self.min_exp {
            r.push("per_decade", "need per_decade > 0 and min_exp ≤ max_exp");
        }
        if !(self.duration_s > 0.0 && self.reconstruct_tolerance > 0.0) {
            r.push("duration_s", "duration and tolerance must be positive");
        }
    }
}

impl Experiment for SadcCurve {
    const NAME: &'static str = "sadc-curve";
    const CONFIG: &'static str = include_str!("../../configs/sadc-curve.toml");
    type Config = SadcCurveConfig;

    fn run(cfg: &SadcCurveConfig, ctx: &Context, out: &mut Outputs) -> Result<()> {
        let currents = logspace(cfg.min_exp, cfg.max_exp, cfg.per_decade);
        let rows = ctx.map(currents.len(), |k| -> Result<_> {
            let i = currents[k];
            let spikes = sadc_events(&[(0.0, i)], &cfg.sadc, cfg.duration_s)?;
            let rec = sadc_reconstruct(&spikes, &cfg.sadc)?;
            let mean = if rec.is_empty() { f64::NAN } else { rec.iter().map(|r| r.1).sum::<f64>() / rec.len() as f64 };
            Ok((i, sadc_rate(i, &cfg.sadc)?, spikes.len() as f64 / cfg.duration_s, mean))
        })?;
        let mut last = 0.0;
        for &(i, rate, _, rec) in &rows {
            out.check(rate > last, || format!("rate {rate} Hz at {i:e} A does not rise"));
            last = rate;
            out.check(rec.is_nan() || ((rec - i) / i).abs() <= cfg.reconstruct_tolerance, || {
                format!("reconstruction {rec:e} A of {i:e} A off by more than {}", cfg.reconstruct_tolerance)
            });
        }
        let rows = rows.into_iter().map(|(i, rate, sim, rec)| {
            let mut r = row![i, rate, sim];
            r.push(if rec.is_nan() { String::new() } else { row![rec].remove(0) });
            r
        });
        out.csv("sadc_curve.csv", &["i_in_a", "rate_hz", "sim_rate_hz", "reconstructed_a"], rows)
    }
}

/// Every valid DAC code and its output current.
pub struct DacTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DacTableConfig {
    /// Also list sink-polarity codes.
    pub include_sink: bool,
}

impl Default for DacTableConfig {
    fn default() -> Self {
        Self { include_sink: true }
    }
}

impl Validate for DacTableConfig {
    fn validate(&self, _: &mut Report) {}
}

impl Experiment for DacTable {
    const NAME: &'static str = "dac-table";
    const CONFIG: &'static str = include_str!("../../configs/dac-table.toml");
    type Config = DacTableConfig;

    fn run(cfg: &DacTableConfig, _ctx: &Context, out: &mut Outputs) -> Result<()> {
        let polarities: &[Polarity] = if cfg.include_sink { &[Polarity::Source, Polarity::Sink] } else { &[Polarity::Source] };
        let mut rows = Vec::new();
        for &polarity in polarities {
            for master_select in 0..MASTER_CURRENTS.len() as u8 {
                let mut last = 0.0f64;
                for fine in 0..=255u8 {
                    let ch = DacChannel { master_select, fine, polarity };
                    let i = dac_current(&ch)?;
                    out.check(i.abs() <= 2.2e-6, || format!("code {:#05x}: {i:e} A out of range", ch.code().unwrap_or(0)));
                    out.check(i.abs() >= last, || format!("code {:#05x}: current not monotone in fine", ch.code().unwrap_or(0)));
                    last = i.abs();
                    let pol = match polarity {
                        Polarity::Source => "source",
                        Polarity::Sink => "sink",
                    };
                    rows.push(row![ch.code()?, master_select, fine, pol, i]);
                }
            }
        }
        out.csv("dac_table.csv", &["code", "master_select", "fine", "polarity", "current_a"], rows)
    }
}
