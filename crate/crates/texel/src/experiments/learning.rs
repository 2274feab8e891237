use serde::{Deserialize, Serialize};
use texel_core::plasticity::{
    run_synapse, srdp_trial, stdp_scan, steady_calcium, PairingProtocol, PlasticityParams, SrdpProtocol,
};
use texel_core::rng;

use super::{linspace, ns, Experiment, Outputs};
use crate::error::Result;
use crate::exec::Context;
use crate::row;
use crate::validate::{self, Report, Validate};

/// One synapse driven by two independent Poisson trains, sampled densely.
pub struct TraceDemo;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceDemoConfig {
    pub plasticity: PlasticityParams,
    pub pre_rate_hz: f64,
    pub post_rate_hz: f64,
    pub duration_s: f64,
    pub v_init: f64,
    pub sample_dt_s: f64,
}

impl Default for TraceDemoConfig {
    fn default() -> Self {
        Self {
            plasticity: PlasticityParams::stdp_default(),
            pre_rate_hz: 20.0,
            post_rate_hz: 20.0,
            duration_s: 1.0,
            v_init: 0.8,
            sample_dt_s: 1e-4,
        }
    }
}

impl Validate for TraceDemoConfig {
    fn validate(&self, r: &mut Report) {
        validate::plasticity(r, "plasticity", &self.plasticity);
        if !(self.pre_rate_hz >= 0.0 && self.post_rate_hz >= 0.0) {
            r.push("pre_rate_hz", "rates must be non-negative");
        }
        if !(self.duration_s > 0.0 && self.sample_dt_s > 0.0) {
            r.push("duration_s", "duration and sample_dt must be positive");
        }
        if !(0.0..=self.plasticity.w_max).contains(&self.v_init) {
            r.push("v_init", "must lie in [0, plasticity.w_max]");
        }
    }
}

impl Experiment for TraceDemo {
    const NAME: &'static str = "trace-demo";
    const CONFIG: &'static str = include_str!("../../configs/trace-demo.toml");
    type Config = TraceDemoConfig;

    fn run(cfg: &TraceDemoConfig, ctx: &Context, out: &mut Outputs) -> Result<()> {
        let pre = rng::poisson_train(&mut rng::stream(ctx.seed, &[0]), cfg.pre_rate_hz, 0.0, cfg.duration_s);
        let post = rng::poisson_train(&mut rng::stream(ctx.seed, &[1]), cfg.post_rate_hz, 0.0, cfg.duration_s);
        let (_, samples) = run_synapse(&cfg.plasticity, &pre, &post, cfg.v_init, cfg.duration_s, Some(cfg.sample_dt_s))?;
        let p = &cfg.plasticity;
        for s in &samples {
            out.check((0.0..=p.w_max).contains(&s.v_w), || format!("v_w {} V out of range at t = {} s", s.v_w, s.t));
            out.check(s.binary_w.is_high() == (s.v_w >= p.theta_w), || {
                format!("binary weight disagrees with v_w {} V at t = {} s", s.v_w, s.t)
            });
        }
        out.csv(
            "trace_demo.csv",
            &["t_ns", "v_w_v", "i_pre_a", "i_post_a", "ca_a", "w_bin"],
            samples.iter().map(|s| row![ns(s.t), s.v_w, s.pre_trace, s.post_trace, s.ca, s.binary_w.is_high() as u8]),
        )?;
        let mut spikes: Vec<(u64, &str)> = pre.iter().map(|&t| (ns(t), "pre")).collect();
        spikes.extend(post.iter().map(|&t| (ns(t), "post")));
        spikes.sort();
        out.csv("trace_demo_spikes.csv", &["t_ns", "source"], spikes.into_iter().map(|(t, s)| row![t, s]))
    }
}

/// Pairing window for the default and biased parameter sets.
pub struct Stdp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StdpConfig {
    pub default: PlasticityParams,
    pub biased: PlasticityParams,
    pub protocol: PairingProtocol,
    pub dt_max_s: f64,
    pub dt_steps: usize,
}

impl Default for StdpConfig {
    fn default() -> Self {
        Self {
            default: PlasticityParams::stdp_default(),
            biased: PlasticityParams::stdp_biased(),
            protocol: PairingProtocol::default(),
            dt_max_s: 80e-3,
            dt_steps: 161,
        }
    }
}

impl Validate for StdpConfig {
    fn validate(&self, r: &mut Report) {
        validate::plasticity(r, "default", &self.default);
        validate::plasticity(r, "biased", &self.biased);
        if !(self.protocol.interval > 0.0 && 2.0 * self.dt_max_s < self.protocol.interval) {
            r.push("protocol.interval", "must exceed twice dt_max_s");
        }
        if self.protocol.pairs == 0 {
            r.push("protocol.pairs", "need at least one pair");
        }
        if !(self.dt_max_s > 0.0) || self.dt_steps < 2 {
            r.push("dt_steps", "need dt_max_s > 0 and at least 2 steps");
        }
    }
}

/// Sign structure of a pairing scan: `Δt > 0` never depresses, `Δt < 0`
/// never potentiates, and both sides change somewhere.
pub fn hebbian_signs(scan: &[(f64, f64)]) -> std::result::Result<(), String> {
    if let Some(&(dt, dv)) = scan.iter().find(|&&(dt, dv)| (dt > 0.0 && dv < 0.0) || (dt < 0.0 && dv > 0.0)) {
        return Err(format!("Δt = {dt} s gives Δv = {dv} V"));
    }
    if !scan.iter().any(|&(dt, dv)| dt > 0.0 && dv > 0.0) || !scan.iter().any(|&(dt, dv)| dt < 0.0 && dv < 0.0) {
        return Err("one side of the window is flat".into());
    }
    Ok(())
}

/// A depressive lobe on the causal side between potentiation near zero.
pub fn causal_lobe(scan: &[(f64, f64)]) -> std::result::Result<(), String> {
    let causal: Vec<_> = scan.iter().filter(|p| p.0 > 0.0).collect();
    let first = causal.first().ok_or("no causal delays")?;
    if !(first.1 > 0.0) {
        return Err(format!("shortest causal delay {} s does not potentiate", first.0));
    }
    if !causal.iter().any(|p| p.1 < 0.0) {
        return Err("no depression for Δt > 0".into());
    }
    if !scan.iter().any(|p| p.0 < 0.0 && p.1 < 0.0) {
        return Err("no depression for Δt < 0".into());
    }
    Ok(())
}

impl Experiment for Stdp {
    const NAME: &'static str = "stdp";
    const CONFIG: &'static str = include_str!("../../configs/stdp.toml");
    type Config = StdpConfig;

    fn run(cfg: &StdpConfig, _ctx: &Context, out: &mut Outputs) -> Result<()> {
        let grid = linspace(-cfg.dt_max_s, cfg.dt_max_s, cfg.dt_steps);
        let default = stdp_scan(&cfg.default, &grid, &cfg.protocol)?;
        let biased = stdp_scan(&cfg.biased, &grid, &cfg.protocol)?;
        if let Err(msg) = hebbian_signs(&default) {
            out.violations.push(format!("default window: {msg}"));
        }
        if let Err(msg) = causal_lobe(&biased) {
            out.violations.push(format!("biased window: {msg}"));
        }
        let rows = [("default", &default), ("biased", &biased)]
            .into_iter()
            .flat_map(|(name, scan)| scan.iter().map(move |&(dt, dv)| row![name, dt, dv]));
        out.csv("stdp.csv", &["variant", "dt_s", "dv_v"], rows)
    }
}

/// Probability of ending high over a pre/post rate grid.
pub struct Srdp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SrdpConfig {
    pub plasticity: PlasticityParams,
    pub protocol: SrdpProtocol,
}

impl Default for SrdpConfig {
    fn default() -> Self {
        let rates = vec![0.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 80.0, 100.0];
        Self {
            plasticity: PlasticityParams::srdp_default(),
            protocol: SrdpProtocol { pre_rates: rates.clone(), post_rates: rates, trials: 20, duration: 2.0 },
        }
    }
}

impl Validate for SrdpConfig {
    fn validate(&self, r: &mut Report) {
        validate::plasticity(r, "plasticity", &self.plasticity);
        let p = &self.protocol;
        if p.trials == 0 {
            r.push("protocol.trials", "need at least one trial");
        }
        if !(p.duration > 0.0) {
            r.push("protocol.duration", "must be positive");
        }
        for (name, rates) in [("protocol.pre_rates", &p.pre_rates), ("protocol.post_rates", &p.post_rates)] {
            if rates.is_empty() || rates.windows(2).any(|w| !(w[0] < w[1])) || rates.iter().any(|&x| !(x >= 0.0)) {
                r.push(name, "need a non-empty, strictly increasing list of non-negative rates");
            }
        }
    }
}

/// Monotonicity of an SRDP map: along pre everywhere, along post while the
/// steady calcium stays below the upper threshold.
pub fn srdp_monotone(params: &PlasticityParams, protocol: &SrdpProtocol, map: &[Vec<f64>]) -> Vec<String> {
    let mut bad = Vec::new();
    for (i, rows) in map.windows(2).enumerate() {
        for (j, (&lo, &hi)) in rows[0].iter().zip(&rows[1]).enumerate() {
            if hi < lo {
                bad.push(format!(
                    "P(high) falls from {lo} to {hi} as pre rate rises to {} Hz at post {} Hz",
                    protocol.pre_rates[i + 1],
                    protocol.post_rates[j]
                ));
            }
        }
    }
    let below = protocol.post_rates.iter().take_while(|&&r| steady_calcium(params, r) < params.theta_ca_high).count();
    for (i, row) in map.iter().enumerate() {
        for j in 1..below {
            if row[j] < row[j - 1] {
                bad.push(format!(
                    "P(high) falls from {} to {} as post rate rises to {} Hz at pre {} Hz",
                    row[j - 1],
                    row[j],
                    protocol.post_rates[j],
                    protocol.pre_rates[i]
                ));
            }
        }
    }
    bad
}

impl Experiment for Srdp {
    const NAME: &'static str = "srdp";
    const CONFIG: &'static str = include_str!("../../configs/srdp.toml");
    type Config = SrdpConfig;

    fn run(cfg: &SrdpConfig, ctx: &Context, out: &mut Outputs) -> Result<()> {
        let p = &cfg.protocol;
        let trials = ctx.map(p.trials, |k| srdp_trial(&cfg.plasticity, p, ctx.seed, k))?;
        let mut map = vec![vec![0.0; p.post_rates.len()]; p.pre_rates.len()];
        for t in &trials {
            for (row, trow) in map.iter_mut().zip(t) {
                for (c, &high) in row.iter_mut().zip(trow) {
                    *c += high as u8 as f64;
                }
            }
        }
        for c in map.iter_mut().flatten() {
            *c /= p.trials as f64;
        }
        out.violations.extend(srdp_monotone(&cfg.plasticity, p, &map));
        let rows = p
            .pre_rates
            .iter()
            .zip(&map)
            .flat_map(|(&pre, row)| p.post_rates.iter().zip(row).map(move |(&post, &ph)| row![pre, post, ph]));
        out.csv("srdp.csv", &["pre_rate_hz", "post_rate_hz", "p_high"], rows)
    }
}
