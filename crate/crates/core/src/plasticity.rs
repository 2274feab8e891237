//! Trace-based bistable plasticity for the plastic synapses.
//!
//! Each synapse keeps a presynaptic trace and an analog weight `v_w`; each
//! neuron keeps a postsynaptic trace and a second-order calcium trace shared by
//! all of its synapses. Updates happen at spike instants only:
//!
//! * presynaptic spike: depress by `dep_step` when the post-trace is above its
//!   low threshold;
//! * postsynaptic spike: potentiate by `pot_gain · pre_trace` when the
//!   pre-trace lies inside its window, optionally also depress by `dep_step`
//!   when the pre-trace lies inside a second window.
//!
//! Both are allowed only while the calcium trace sits inside its stop-learning
//! band. Between spikes `v_w` drifts linearly toward the rail on its side of
//! `theta_w`.

use alloc::vec::Vec;

use crate::dynamics::{FilterState, SoDpiState};
use crate::error::{non_negative, positive, Error, Result};
use crate::{rng, Binary};

/// Second-order calcium trace parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct CaParams {
    pub tau1: f64,
    pub tau2: f64,
    /// Jump of the first stage per postsynaptic spike (A).
    pub jump: f64,
}

/// Stop-learning gate mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Gate {
    /// Open while `theta_ca_low ≤ Ca ≤ theta_ca_high`.
    #[default]
    Calcium,
    ForcedOpen,
    ForcedClosed,
}

/// A closed interval on the pre-trace (A).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct TraceWindow {
    pub low: f64,
    pub high: f64,
}

impl TraceWindow {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PlasticityParams {
    pub tau_pre: f64,
    pub pre_jump: f64,
    pub tau_post: f64,
    pub post_jump: f64,
    pub theta_post_low: f64,
    pub theta_pre_low: f64,
    pub theta_pre_high: f64,
    pub ca: CaParams,
    pub theta_ca_low: f64,
    pub theta_ca_high: f64,
    /// Potentiation per unit pre-trace at a postsynaptic spike (V/A).
    pub pot_gain: f64,
    /// Depression per qualifying event (V).
    pub dep_step: f64,
    pub theta_w: f64,
    /// Bistability drift rates (V/s).
    pub slew_up: f64,
    pub slew_down: f64,
    pub w_max: f64,
    pub hebbian: bool,
    /// Pre-trace window that also depresses at a postsynaptic spike.
    #[cfg_attr(feature = "serde", serde(default))]
    pub post_window_depression: Option<TraceWindow>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub gate: Gate,
}

impl Default for PlasticityParams {
    fn default() -> Self {
        Self::stdp_default()
    }
}

impl PlasticityParams {
    /// Symmetric pairing set: 20 ms traces, equal low thresholds.
    pub fn stdp_default() -> Self {
        Self {
            tau_pre: 20e-3,
            pre_jump: 100e-12,
            tau_post: 20e-3,
            post_jump: 100e-12,
            theta_post_low: 10e-12,
            theta_pre_low: 10e-12,
            theta_pre_high: 1e-9,
            ca: CaParams { tau1: 100e-3, tau2: 500e-3, jump: 10e-12 },
            theta_ca_low: 0.0,
            theta_ca_high: 1e-9,
            pot_gain: 1e9,
            dep_step: 50e-3,
            theta_w: 0.9,
            slew_up: 0.1,
            slew_down: 0.1,
            w_max: 1.8,
            hebbian: true,
            post_window_depression: None,
            gate: Gate::Calcium,
        }
    }

    /// Pairing set with an extra pre-trace window that depresses at the
    /// postsynaptic spike, carving a depressive lobe out of the causal side.
    pub fn stdp_biased() -> Self {
        Self {
            theta_pre_low: 0.0,
            dep_step: 60e-3,
            post_window_depression: Some(TraceWindow { low: 5e-12, high: 60e-12 }),
            ..Self::stdp_default()
        }
    }

    /// Rate-protocol set: weak per-event updates, a calcium band that starts
    /// above a few Hz of postsynaptic activity and closes near 60 Hz.
    pub fn srdp_default() -> Self {
        Self {
            theta_post_low: 50e-12,
            theta_pre_low: 0.0,
            theta_pre_high: 1e-6,
            ca: CaParams { tau1: 100e-3, tau2: 500e-3, jump: 10e-12 },
            theta_ca_low: 3e-12,
            theta_ca_high: 60e-12,
            pot_gain: 3e8,
            dep_step: 5e-3,
            ..Self::stdp_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("tau_pre", self.tau_pre)?;
        positive("tau_post", self.tau_post)?;
        positive("ca.tau1", self.ca.tau1)?;
        positive("ca.tau2", self.ca.tau2)?;
        non_negative("pre_jump", self.pre_jump)?;
        non_negative("post_jump", self.post_jump)?;
        non_negative("ca.jump", self.ca.jump)?;
        non_negative("theta_post_low", self.theta_post_low)?;
        non_negative("theta_pre_low", self.theta_pre_low)?;
        non_negative("theta_ca_low", self.theta_ca_low)?;
        non_negative("pot_gain", self.pot_gain)?;
        non_negative("dep_step", self.dep_step)?;
        non_negative("slew_up", self.slew_up)?;
        non_negative("slew_down", self.slew_down)?;
        positive("w_max", self.w_max)?;
        if !(self.theta_pre_low < self.theta_pre_high) {
            return Err(Error::InvalidParameter { name: "theta_pre_high", value: self.theta_pre_high });
        }
        if !(self.theta_ca_low < self.theta_ca_high) {
            return Err(Error::InvalidParameter { name: "theta_ca_high", value: self.theta_ca_high });
        }
        if !(self.theta_w > 0.0 && self.theta_w < self.w_max) {
            return Err(Error::InvalidParameter { name: "theta_w", value: self.theta_w });
        }
        if let Some(w) = self.post_window_depression {
            non_negative("post_window_depression.low", w.low)?;
            if !(w.low < w.high) {
                return Err(Error::InvalidParameter { name: "post_window_depression.high", value: w.high });
            }
        }
        Ok(())
    }

    /// The same set with bistability switched off.
    pub fn frozen(self) -> Self {
        Self { slew_up: 0.0, slew_down: 0.0, ..self }
    }

    fn sign(&self) -> f64 {
        if self.hebbian {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynapseState {
    pub v_w: f64,
    pub pre_trace: FilterState,
    pub binary_w: Binary,
}

impl SynapseState {
    pub fn new(params: &PlasticityParams, v_w: f64, t: f64) -> Result<Self> {
        params.validate()?;
        if !(0.0..=params.w_max).contains(&v_w) {
            return Err(Error::InvalidParameter { name: "v_w", value: v_w });
        }
        let pre_trace = FilterState::with_value(params.tau_pre, 0.0, t)?;
        Ok(quantize(&Self { v_w, pre_trace, binary_w: Binary::Low }, params))
    }

    pub fn time(&self) -> f64 {
        self.pre_trace.last_update
    }
}

/// Per-neuron traces read by every plastic synapse of the neuron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronTraces {
    pub post_trace: FilterState,
    pub ca: SoDpiState,
}

impl NeuronTraces {
    pub fn new(params: &PlasticityParams, t: f64) -> Result<Self> {
        let post_trace = FilterState::with_value(params.tau_post, 0.0, t)?;
        let mut ca = SoDpiState::new(params.ca.tau1, params.ca.tau2)?;
        ca.stage1.last_update = t;
        ca.stage2.last_update = t;
        Ok(Self { post_trace, ca })
    }

    pub fn advance(&self, t: f64) -> Result<Self> {
        Ok(Self { post_trace: self.post_trace.advance(t)?, ca: self.ca.advance(t)? })
    }

    /// Kicks the post-trace and calcium for an output spike at `t`.
    pub fn on_post_spike(&self, params: &PlasticityParams, t: f64) -> Result<Self> {
        Ok(Self { post_trace: self.post_trace.spike(t, params.post_jump)?, ca: self.ca.spike(t, params.ca.jump)? })
    }

    /// Stop-learning gate state, evaluated on the traces as they are.
    pub fn gate_open(&self, params: &PlasticityParams) -> bool {
        match params.gate {
            Gate::ForcedOpen => true,
            Gate::ForcedClosed => false,
            Gate::Calcium => {
                let ca = self.ca.output();
                params.theta_ca_low <= ca && ca <= params.theta_ca_high
            }
        }
    }
}

fn drift_value(v: f64, params: &PlasticityParams, dt: f64) -> f64 {
    if v > params.theta_w {
        (v + params.slew_up * dt).min(params.w_max)
    } else {
        (v - params.slew_down * dt).max(0.0)
    }
}

/// Closed-form bistability drift over `dt`; the drift never crosses `theta_w`.
pub fn bistability_drift(syn: &SynapseState, params: &PlasticityParams, dt: f64) -> Result<SynapseState> {
    non_negative("dt", dt)?;
    Ok(SynapseState { v_w: drift_value(syn.v_w, params, dt), ..*syn })
}

/// Refreshes the binary weight from `v_w`.
pub fn quantize(syn: &SynapseState, params: &PlasticityParams) -> SynapseState {
    SynapseState { binary_w: Binary::from_bool(syn.v_w >= params.theta_w), ..*syn }
}

/// Advances the pre-trace to `t` and applies the drift accumulated since the last update.
pub fn advance_synapse(syn: &SynapseState, params: &PlasticityParams, t: f64) -> Result<SynapseState> {
    let dt = t - syn.time();
    let pre_trace = syn.pre_trace.advance(t)?;
    Ok(SynapseState { v_w: drift_value(syn.v_w, params, dt), pre_trace, binary_w: syn.binary_w })
}

fn step_weight(v: f64, dv: f64, params: &PlasticityParams) -> f64 {
    (v + dv).clamp(0.0, params.w_max)
}

/// Presynaptic spike at `t`. `traces` may lag behind `t`; they are advanced here.
pub fn on_pre_spike(syn: &SynapseState, traces: &NeuronTraces, params: &PlasticityParams, t: f64) -> Result<SynapseState> {
    let mut s = advance_synapse(syn, params, t)?;
    let tr = traces.advance(t)?;
    if tr.gate_open(params) && tr.post_trace.value > params.theta_post_low {
        s.v_w = step_weight(s.v_w, -params.sign() * params.dep_step, params);
    }
    s.pre_trace = s.pre_trace.kick(params.pre_jump)?;
    Ok(quantize(&s, params))
}

/// Postsynaptic spike at `t`, seen by one synapse.
///
/// `traces` must be the neuron traces before this spike's own kicks; call
/// [`NeuronTraces::on_post_spike`] after updating every synapse of the neuron.
pub fn on_post_spike(syn: &SynapseState, traces: &NeuronTraces, params: &PlasticityParams, t: f64) -> Result<SynapseState> {
    let mut s = advance_synapse(syn, params, t)?;
    let tr = traces.advance(t)?;
    if tr.gate_open(params) {
        let pre = s.pre_trace.value;
        let mut dv = 0.0;
        if params.theta_pre_low <= pre && pre <= params.theta_pre_high {
            dv += params.pot_gain * pre;
        }
        if params.post_window_depression.is_some_and(|w| w.contains(pre)) {
            dv -= params.dep_step;
        }
        s.v_w = step_weight(s.v_w, params.sign() * dv, params);
    }
    Ok(quantize(&s, params))
}

/// One sample of a single-synapse run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynapseSample {
    pub t: f64,
    pub v_w: f64,
    pub pre_trace: f64,
    pub post_trace: f64,
    pub ca: f64,
    pub binary_w: Binary,
}

/// Drives one synapse with given pre and post spike times (each sorted).
///
/// Simultaneous pre and post spikes are applied pre first. With `sample_dt`
/// set, the state is also sampled on that grid from 0 to `t_end`.
pub fn run_synapse(
    params: &PlasticityParams,
    pre: &[f64],
    post: &[f64],
    v_init: f64,
    t_end: f64,
    sample_dt: Option<f64>,
) -> Result<(SynapseState, Vec<SynapseSample>)> {
    for train in [pre, post] {
        if let Some(k) = train.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::NonMonotoneInput { index: k + 1 });
        }
    }
    let mut syn = SynapseState::new(params, v_init, 0.0)?;
    let mut tr = NeuronTraces::new(params, 0.0)?;
    let mut samples = Vec::new();
    let mut next_sample = 0usize;
    if let Some(dt) = sample_dt {
        positive("sample_dt", dt)?;
    }
    let emit = |syn: &SynapseState, tr: &NeuronTraces, t: f64, out: &mut Vec<SynapseSample>| -> Result<()> {
        let s = quantize(&advance_synapse(syn, params, t)?, params);
        let n = tr.advance(t)?;
        out.push(SynapseSample {
            t,
            v_w: s.v_w,
            pre_trace: s.pre_trace.value,
            post_trace: n.post_trace.value,
            ca: n.ca.output(),
            binary_w: s.binary_w,
        });
        Ok(())
    };

    let (mut i, mut j) = (0, 0);
    loop {
        let tp = pre.get(i).copied().filter(|&t| t < t_end);
        let tq = post.get(j).copied().filter(|&t| t < t_end);
        let next = match (tp, tq) {
            (None, None) => t_end,
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (Some(a), Some(b)) => a.min(b),
        };
        if let Some(dt) = sample_dt {
            while (next_sample as f64) * dt <= next && (next_sample as f64) * dt <= t_end {
                emit(&syn, &tr, next_sample as f64 * dt, &mut samples)?;
                next_sample += 1;
            }
        }
        if tp.is_none() && tq.is_none() {
            break;
        }
        if tp == Some(next) {
            syn = on_pre_spike(&syn, &tr, params, next)?;
            i += 1;
        } else {
            syn = on_post_spike(&syn, &tr, params, next)?;
            tr = tr.advance(next)?.on_post_spike(params, next)?;
            j += 1;
        }
    }
    let syn = quantize(&advance_synapse(&syn, params, t_end)?, params);
    Ok((syn, samples))
}

/// Pair-based stimulation protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PairingProtocol {
    pub pairs: usize,
    /// Time between successive pairs (s).
    pub interval: f64,
    /// Initial analog weight; `None` means `w_max / 2`.
    pub v_w_init: Option<f64>,
    pub freeze_bistability: bool,
}

impl Default for PairingProtocol {
    fn default() -> Self {
        Self { pairs: 1, interval: 1.0, v_w_init: None, freeze_bistability: true }
    }
}

/// Weight change for each pairing delay `Δt = t_post − t_pre`.
///
/// Positive `Δt` is pre-before-post.
pub fn stdp_scan(params: &PlasticityParams, dt_grid: &[f64], protocol: &PairingProtocol) -> Result<Vec<(f64, f64)>> {
    params.validate()?;
    positive("interval", protocol.interval)?;
    let p = if protocol.freeze_bistability { params.frozen() } else { *params };
    let v0 = protocol.v_w_init.unwrap_or(0.5 * params.w_max);
    dt_grid
        .iter()
        .map(|&dt| {
            if !(2.0 * dt.abs() < protocol.interval) {
                return Err(Error::InvalidParameter { name: "dt", value: dt });
            }
            let lead = dt.abs();
            let mut pre = Vec::with_capacity(protocol.pairs);
            let mut post = Vec::with_capacity(protocol.pairs);
            for k in 0..protocol.pairs {
                let base = lead + k as f64 * protocol.interval;
                pre.push(base);
                post.push(base + dt);
            }
            let t_end = protocol.pairs as f64 * protocol.interval + lead;
            let (end, _) = run_synapse(&p, &pre, &post, v0, t_end, None)?;
            Ok((dt, end.v_w - v0))
        })
        .collect()
}

/// Rate-protocol scan settings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SrdpProtocol {
    pub pre_rates: Vec<f64>,
    pub post_rates: Vec<f64>,
    pub trials: usize,
    pub duration: f64,
}

/// `P(binary_w = high)` for every `(ν_pre, ν_post)` cell, indexed `[pre][post]`.
///
/// Trial `k` starts every cell from the same uniform initial weight and uses
/// nested Poisson trains, so neighbouring cells differ only by added spikes.
pub fn srdp_scan(params: &PlasticityParams, protocol: &SrdpProtocol, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut counts = alloc::vec![alloc::vec![0usize; protocol.post_rates.len()]; protocol.pre_rates.len()];
    for trial in 0..protocol.trials {
        let trial_counts = srdp_trial(params, protocol, seed, trial)?;
        for (row, trow) in counts.iter_mut().zip(trial_counts) {
            for (c, high) in row.iter_mut().zip(trow) {
                *c += high as usize;
            }
        }
    }
    Ok(counts.into_iter().map(|row| row.into_iter().map(|c| c as f64 / protocol.trials as f64).collect()).collect())
}

/// Final binary state of every cell for one trial.
pub fn srdp_trial(params: &PlasticityParams, protocol: &SrdpProtocol, seed: u64, trial: usize) -> Result<Vec<Vec<bool>>> {
    params.validate()?;
    positive("duration", protocol.duration)?;
    if protocol.trials == 0 {
        return Err(Error::InvalidParameter { name: "trials", value: 0.0 });
    }
    for &r in protocol.pre_rates.iter().chain(&protocol.post_rates) {
        non_negative("rate", r)?;
    }
    let max_of = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let k = trial as u64;
    let pre_src = rng::ThinnedPoisson::new(&mut rng::stream(seed, &[k, 0]), max_of(&protocol.pre_rates), 0.0, protocol.duration);
    let post_src =
        rng::ThinnedPoisson::new(&mut rng::stream(seed, &[k, 1]), max_of(&protocol.post_rates), 0.0, protocol.duration);
    let v0 = rng::uniform(&mut rng::stream(seed, &[k, 2])) * params.w_max;
    protocol
        .pre_rates
        .iter()
        .map(|&nu_pre| {
            let pre = pre_src.at_rate(nu_pre);
            protocol
                .post_rates
                .iter()
                .map(|&nu_post| {
                    let post = post_src.at_rate(nu_post);
                    let (end, _) = run_synapse(params, &pre, &post, v0, protocol.duration, None)?;
                    Ok(end.binary_w.is_high())
                })
                .collect()
        })
        .collect()
}

/// Steady calcium level for a regular postsynaptic rate (A).
pub fn steady_calcium(params: &PlasticityParams, rate: f64) -> f64 {
    rate * params.ca.jump * params.ca.tau1
}
