//! Adaptive exponential integrate-and-fire soma in current mode.
//!
//! The membrane current `I` obeys
//!
//! ```text
//! τ_mem · dI/dt = −I + gain_in · max(0, i_dc + i_syn − i_ahp) + exp_gain · max(0, I − exp_knee)
//! ```
//!
//! Inside any interval where the two `max` terms keep their branch, the right
//! hand side is linear in `I` plus a sum of decaying exponentials, so the
//! trajectory has a closed form. The integrator walks forward in short
//! detection steps, evaluates the closed form at each step end, and bisects
//! (to 1 ns) whenever the knee, the threshold or the sign of the drive is
//! crossed. The step length therefore only affects how crossings are found,
//! never the accuracy of the trajectory between them.

use alloc::vec::Vec;

use crate::dynamics::{growth_integral, FilterState};
use crate::error::{finite, non_negative, positive, Error, Result};
use crate::rng;

/// Resolution of spike and regime-switch localisation.
pub const CROSSING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct NeuronParams {
    /// Somatic DPI time constant (s).
    pub tau_mem: f64,
    /// Constant injected current (A).
    pub i_dc: f64,
    /// Spiking threshold on the membrane current (A).
    pub i_thresh: f64,
    /// Refractory period (s).
    pub t_refr: f64,
    /// Slope of the positive-feedback branch.
    pub exp_gain: f64,
    /// Membrane current at which positive feedback switches on (A).
    pub exp_knee: f64,
    /// Adaptation DPI time constant (s).
    pub ahp_tau: f64,
    /// Adaptation current added per output spike (A).
    pub ahp_jump: f64,
    /// Coupling of the net input current into the membrane.
    pub gain_in: f64,
}

impl Default for NeuronParams {
    fn default() -> Self {
        Self {
            tau_mem: 20e-3,
            i_dc: 0.0,
            i_thresh: 1e-9,
            t_refr: 2e-3,
            exp_gain: 2.0,
            exp_knee: 0.6e-9,
            ahp_tau: 200e-3,
            ahp_jump: 0.0,
            gain_in: 1.0,
        }
    }
}

impl NeuronParams {
    pub fn validate(&self) -> Result<()> {
        positive("tau_mem", self.tau_mem)?;
        positive("t_refr", self.t_refr)?;
        positive("ahp_tau", self.ahp_tau)?;
        positive("i_thresh", self.i_thresh)?;
        non_negative("exp_gain", self.exp_gain)?;
        non_negative("ahp_jump", self.ahp_jump)?;
        non_negative("gain_in", self.gain_in)?;
        finite("i_dc", self.i_dc)?;
        if !(self.exp_knee > 0.0 && self.exp_knee < self.i_thresh) {
            return Err(Error::InvalidParameter { name: "exp_knee", value: self.exp_knee });
        }
        Ok(())
    }

    /// Plain LIF: no positive feedback, no adaptation.
    pub fn lif(self) -> Self {
        Self { exp_gain: 0.0, ahp_jump: 0.0, ..self }
    }

    /// Smallest constant input that makes the neuron fire repetitively.
    pub fn rheobase(&self) -> f64 {
        if self.gain_in == 0.0 {
            return f64::INFINITY;
        }
        if self.exp_gain >= 1.0 {
            // Above the knee the feedback branch runs away, so reaching it suffices.
            self.exp_knee / self.gain_in
        } else {
            let fixed = self.i_thresh * (1.0 - self.exp_gain) + self.exp_gain * self.exp_knee;
            fixed.max(self.exp_knee) / self.gain_in
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronState {
    pub i_mem: FilterState,
    pub i_ahp: FilterState,
    pub refr_until: f64,
    pub last_spike: Option<f64>,
}

impl NeuronState {
    pub fn new(params: &NeuronParams, t: f64) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            i_mem: FilterState::with_value(params.tau_mem, 0.0, t)?,
            i_ahp: FilterState::with_value(params.ahp_tau, 0.0, t)?,
            refr_until: t,
            last_spike: None,
        })
    }

    pub fn time(&self) -> f64 {
        self.i_mem.last_update
    }
}

/// An input current `amplitude · e^{−(t − t₀)/tau}` anchored at the state's time `t₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayingTerm {
    pub amplitude: f64,
    pub tau: f64,
}

/// Synaptic input over an advance: a constant plus signed decaying terms.
///
/// Excitatory DPI outputs enter with positive amplitude, inhibitory ones with
/// negative amplitude. `i_dc` and adaptation are added from the params/state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Drive {
    pub constant: f64,
    pub decaying: Vec<DecayingTerm>,
}

impl Drive {
    pub fn constant(current: f64) -> Self {
        Self { constant: current, decaying: Vec::new() }
    }
}

/// One constant piece of a piecewise-constant synaptic current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputStep {
    /// Time from which `current` applies (s).
    pub t: f64,
    pub current: f64,
}

// Exponential forcing terms relative to the start of a closed-form segment:
// the net drive is `offset + Σ amp·e^{-rate·s}`.
struct Forcing {
    offset: f64,
    terms: Vec<(f64, f64)>,
}

impl Forcing {
    fn at(&self, s: f64) -> f64 {
        self.offset + self.terms.iter().map(|(a, r)| a * libm::exp(-r * s)).sum::<f64>()
    }

    fn min_tau(&self) -> f64 {
        self.terms.iter().filter(|(a, _)| *a != 0.0).fold(f64::INFINITY, |m, (_, r)| m.min(1.0 / r))
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Regime {
    above_knee: bool,
    drive_on: bool,
}

struct Integrator<'a> {
    p: &'a NeuronParams,
    forcing: Forcing,
}

impl Integrator<'_> {
    /// Membrane current `x` seconds after segment offset `s0`, starting from `i0`.
    fn trajectory(&self, regime: Regime, i0: f64, s0: f64, x: f64) -> f64 {
        let p = self.p;
        let fb = if regime.above_knee { p.exp_gain } else { 0.0 };
        let alpha = (fb - 1.0) / p.tau_mem;
        let mut beta = -fb * p.exp_knee / p.tau_mem;
        let mut out = libm::exp(alpha * x) * i0;
        if regime.drive_on {
            let g = p.gain_in / p.tau_mem;
            beta += g * self.forcing.offset;
            for &(amp, rate) in &self.forcing.terms {
                let amp = amp * libm::exp(-rate * s0);
                out += g * amp * libm::exp(-rate * x) * growth_integral(alpha + rate, x);
            }
        }
        out + beta * growth_integral(alpha, x)
    }
}

/// Earliest point in `(0, hi]` where `f` flips to true, to within [`CROSSING_TOLERANCE`].
fn bisect(mut f: impl FnMut(f64) -> bool, hi: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, hi);
    while hi - lo > CROSSING_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if f(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Advances the neuron to `t_end` under `drive`, returning output spike times.
///
/// Decaying terms of `drive` are anchored at `state.time()`.
pub fn advance_with_drive(
    state: &NeuronState,
    params: &NeuronParams,
    drive: &Drive,
    t_end: f64,
) -> Result<(NeuronState, Vec<f64>)> {
    let mut spikes = Vec::new();
    let st = advance_into(state, params, drive, t_end, &mut spikes, false)?;
    Ok((st, spikes))
}

/// Like [`advance_with_drive`] but stops right after the first output spike,
/// returning the state at that spike time.
pub fn advance_to_first_spike(
    state: &NeuronState,
    params: &NeuronParams,
    drive: &Drive,
    t_end: f64,
) -> Result<(NeuronState, Option<f64>)> {
    let mut spikes = Vec::new();
    let st = advance_into(state, params, drive, t_end, &mut spikes, true)?;
    Ok((st, spikes.first().copied()))
}

fn decay_terms(terms: &mut [(f64, f64)], dt: f64) {
    for (amp, rate) in terms {
        *amp *= libm::exp(-*rate * dt);
    }
}

fn advance_into(
    state: &NeuronState,
    params: &NeuronParams,
    drive: &Drive,
    t_end: f64,
    spikes: &mut Vec<f64>,
    stop_at_spike: bool,
) -> Result<NeuronState> {
    params.validate()?;
    finite("t_end", t_end)?;
    let t0 = state.time();
    if t_end < t0 {
        return Err(Error::Ordering { from: t0, to: t_end });
    }
    finite("drive", drive.constant)?;
    for term in &drive.decaying {
        finite("drive amplitude", term.amplitude)?;
        positive("drive tau", term.tau)?;
    }

    let mut st = *state;
    let mut t = t0;
    let mut i = st.i_mem.value.min(params.i_thresh);
    // External decaying terms, kept anchored at `t`.
    let mut ext: Vec<(f64, f64)> = drive.decaying.iter().map(|d| (d.amplitude, 1.0 / d.tau)).collect();
    let base = params.i_dc + drive.constant;

    while t < t_end {
        if t < st.refr_until {
            let next = st.refr_until.min(t_end);
            decay_terms(&mut ext, next - t);
            t = next;
            i = 0.0;
            continue;
        }

        let mut terms = ext.clone();
        let ahp = st.i_ahp.value_at(t);
        if ahp > 0.0 {
            terms.push((-ahp, 1.0 / params.ahp_tau));
        }
        let integ = Integrator { p: params, forcing: Forcing { offset: base, terms } };
        let h_nominal = params.tau_mem.min(params.ahp_tau).min(integ.forcing.min_tau()) / 16.0;
        let mut regime = Regime { above_knee: i > params.exp_knee, drive_on: integ.forcing.at(0.0) > 0.0 };

        let span = t_end - t;
        let mut s = 0.0;
        let mut spiked = None;
        let mut stalled_flip = false;
        while s < span {
            let h = h_nominal.min(span - s);
            let mut step = h;
            let mut flip_drive = false;
            if (integ.forcing.at(s + h) > 0.0) != regime.drive_on {
                let on = regime.drive_on;
                step = bisect(|x| (integ.forcing.at(s + x) > 0.0) != on, h);
                flip_drive = true;
            }

            let traj = |x: f64, r: Regime| integ.trajectory(r, i, s, x);
            let i_step = traj(step, regime);

            if regime.above_knee && i_step >= params.i_thresh {
                let dt = bisect(|x| traj(x, regime) >= params.i_thresh, step);
                spiked = Some(t + s + dt);
                break;
            }

            let above = regime.above_knee;
            let crosses = |v: f64| if above { v <= params.exp_knee } else { v > params.exp_knee };
            if crosses(i_step) && !stalled_flip {
                let dt = bisect(|x| crosses(traj(x, regime)), step);
                regime.above_knee = !above;
                if dt <= CROSSING_TOLERANCE {
                    // Crossing at the step start: switch branch without moving, once.
                    stalled_flip = true;
                    continue;
                }
                i = params.exp_knee;
                s += dt;
                if dt >= step && flip_drive {
                    regime.drive_on = !regime.drive_on;
                }
                stalled_flip = false;
                continue;
            }

            i = i_step;
            s += step;
            if flip_drive {
                regime.drive_on = !regime.drive_on;
            }
            regime.above_knee = i > params.exp_knee;
            stalled_flip = false;
        }

        match spiked {
            Some(ts) => {
                let ts = ts.min(t_end);
                decay_terms(&mut ext, ts - t);
                spikes.push(ts);
                st.last_spike = Some(ts);
                st.refr_until = ts + params.t_refr;
                st.i_ahp = st.i_ahp.spike(ts, params.ahp_jump)?;
                i = 0.0;
                t = ts;
                if stop_at_spike {
                    break;
                }
            }
            None => {
                decay_terms(&mut ext, t_end - t);
                t = t_end;
            }
        }
    }

    st.i_mem = FilterState { value: i.clamp(0.0, params.i_thresh), tau: params.tau_mem, last_update: t };
    st.i_ahp = st.i_ahp.advance(t.max(st.i_ahp.last_update))?;
    Ok(st)
}

/// Advances under a piecewise-constant synaptic current.
///
/// `inputs` must be sorted by time; the current before the first step is 0.
pub fn neuron_advance(
    state: &NeuronState,
    params: &NeuronParams,
    inputs: &[InputStep],
    t_end: f64,
) -> Result<(NeuronState, Vec<f64>)> {
    let mut st = *state;
    let mut spikes = Vec::new();
    let mut current = 0.0;
    for (k, step) in inputs.iter().enumerate() {
        if k > 0 && step.t < inputs[k - 1].t {
            return Err(Error::NonMonotoneInput { index: k });
        }
        if step.t > st.time() {
            let until = step.t.min(t_end);
            st = advance_into(&st, params, &Drive::constant(current), until, &mut spikes, false)?;
        }
        current = step.current;
        if step.t >= t_end {
            break;
        }
    }
    st = advance_into(&st, params, &Drive::constant(current), t_end, &mut spikes, false)?;
    Ok((st, spikes))
}

/// Membrane current at `t` if the neuron evolves under `drive` from `state`,
/// without modifying `state`.
pub fn sample_membrane(state: &NeuronState, params: &NeuronParams, drive: &Drive, t: f64) -> Result<f64> {
    Ok(advance_with_drive(state, params, drive, t)?.0.i_mem.value)
}

/// Measurement window for a rate estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateWindow {
    pub warmup: f64,
    pub duration: f64,
}

/// Mean firing rate for each constant input in `dc_values`.
pub fn fi_curve(params: &NeuronParams, dc_values: &[f64], window: RateWindow) -> Result<Vec<f64>> {
    positive("duration", window.duration)?;
    non_negative("warmup", window.warmup)?;
    dc_values
        .iter()
        .map(|&dc| {
            let p = NeuronParams { i_dc: dc, ..*params };
            let st = NeuronState::new(&p, 0.0)?;
            let (_, spikes) = neuron_advance(&st, &p, &[], window.warmup + window.duration)?;
            let counted = spikes.iter().filter(|&&t| t >= window.warmup).count();
            Ok(counted as f64 / window.duration)
        })
        .collect()
}

/// Output of a DC step experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResponse {
    pub spikes: Vec<f64>,
    pub trace: Vec<(f64, f64, f64)>,
}

impl StepResponse {
    /// Inter-spike intervals.
    pub fn isis(&self) -> Vec<f64> {
        self.spikes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `(spike time, 1/ISI)` at each spike after the first.
    pub fn instantaneous_rate(&self) -> Vec<(f64, f64)> {
        self.spikes.windows(2).map(|w| (w[1], 1.0 / (w[1] - w[0]))).collect()
    }
}

/// Applies `dc` from `onset` to `t_end`, sampling `(t, i_mem, i_ahp)` every `sample_dt`.
pub fn step_response(params: &NeuronParams, dc: f64, onset: f64, t_end: f64, sample_dt: f64) -> Result<StepResponse> {
    positive("sample_dt", sample_dt)?;
    let p = NeuronParams { i_dc: 0.0, ..*params };
    let mut st = NeuronState::new(&p, 0.0)?;
    let mut spikes = Vec::new();
    let mut trace = Vec::new();
    let n = libm::floor(t_end / sample_dt) as usize;
    for k in 0..=n {
        let t = (k as f64 * sample_dt).min(t_end);
        let cur = if t > onset { dc } else { 0.0 };
        if t > st.time() {
            // Split at the onset so the step lands exactly.
            if st.time() < onset && t > onset {
                st = advance_into(&st, &p, &Drive::constant(0.0), onset, &mut spikes, false)?;
            }
            st = advance_into(&st, &p, &Drive::constant(cur), t, &mut spikes, false)?;
        }
        trace.push((t, st.i_mem.value, st.i_ahp.value));
    }
    Ok(StepResponse { spikes, trace })
}

/// Static excitatory synapse feeding the soma.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StaticSynapse {
    /// Current jump per presynaptic spike (A).
    pub weight: f64,
    pub tau_syn: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonResponse {
    pub pre_spikes: Vec<f64>,
    pub post_spikes: Vec<f64>,
    /// `(t, i_mem, i_syn)` samples.
    pub trace: Vec<(f64, f64, f64)>,
}

/// Drives the soma with a seeded Poisson train through one static synapse.
pub fn poisson_drive(
    params: &NeuronParams,
    synapse: &StaticSynapse,
    rate: f64,
    seed: u64,
    duration: f64,
    sample_dt: f64,
) -> Result<PoissonResponse> {
    non_negative("rate", rate)?;
    positive("duration", duration)?;
    positive("sample_dt", sample_dt)?;
    let mut r = rng::stream(seed, &[0x5057]);
    let pre = rng::poisson_train(&mut r, rate, 0.0, duration);

    let mut st = NeuronState::new(params, 0.0)?;
    let mut syn = FilterState::new(synapse.tau_syn)?;
    let mut post = Vec::new();
    let mut trace = Vec::new();
    let n = libm::floor(duration / sample_dt) as usize;
    let mut next_pre = pre.iter().peekable();
    for k in 0..=n {
        let ts = k as f64 * sample_dt;
        while let Some(&&tp) = next_pre.peek() {
            if tp > ts {
                break;
            }
            let drive =
                Drive { constant: 0.0, decaying: alloc::vec![DecayingTerm { amplitude: syn.value_at(st.time()), tau: syn.tau }] };
            st = advance_into(&st, params, &drive, tp, &mut post, false)?;
            syn = syn.spike(tp, synapse.weight)?;
            next_pre.next();
        }
        let drive =
            Drive { constant: 0.0, decaying: alloc::vec![DecayingTerm { amplitude: syn.value_at(st.time()), tau: syn.tau }] };
        st = advance_into(&st, params, &drive, ts, &mut post, false)?;
        syn = syn.advance(ts)?;
        trace.push((ts, st.i_mem.value, syn.value));
    }
    Ok(PoissonResponse { pre_spikes: pre, post_spikes: post, trace })
}
