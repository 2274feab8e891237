//! Event-driven chip simulation.
//!
//! Neuron blocks share nothing at run time: the chip has no on-chip routing
//! between neurons, so every block only sees its own input spikes. Each block
//! runs its own time-ordered loop and the per-block logs are merged by a total
//! order, which makes the result independent of how blocks are scheduled.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use super::aer::{first_unsorted, AerEvent, EventKind};
use super::program::{CoreParams, Monitor, MonitorSignal, NetworkProgram};
use super::registers::RegisterFile;
use super::sadc::sadc_events;
use super::topology::{synapse_kind, ChipConfig, NeuronAddr, SynapseKind, PLASTIC_PER_NEURON, STATIC_PER_NEURON};
use crate::dynamics::FilterState;
use crate::error::{Error, Result};
use crate::memdevice::{
    controller_step, read_weight, write_pair, ControllerState, DeviceModel, DifferentialPair, Pulse, PulseKind, Request,
    TimedRequest,
};
use crate::neuron::{advance_to_first_spike, advance_with_drive, DecayingTerm, Drive, NeuronParams, NeuronState};
use crate::plasticity::{on_post_spike, on_pre_spike, NeuronTraces, SynapseState};
use crate::Binary;

pub const NS: f64 = 1e-9;

/// Seconds to the nearest nanosecond tick.
pub fn to_tick(t: f64) -> u64 {
    libm::round(t / NS) as u64
}

pub fn to_seconds(tick: u64) -> f64 {
    tick as f64 * NS
}

/// What happened, with kind-specific payload.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum LogKind {
    InputSpike,
    OutputSpike,
    RegisterWrite {
        value: u32,
    },
    RegisterRead {
        value: u32,
    },
    /// Binary weight of a plastic synapse flipped.
    WeightChange {
        value: Binary,
    },
    ReadStart,
    ReadDone {
        mean_fraction: f64,
    },
    WriteStart {
        value: Binary,
    },
    WriteDone {
        value: Binary,
    },
    Interrupt,
    MonitorSpike,
}

impl LogKind {
    /// Tie-break rank at equal timestamps.
    pub fn class(&self) -> u8 {
        match self {
            LogKind::InputSpike | LogKind::RegisterWrite { .. } | LogKind::RegisterRead { .. } => 0,
            LogKind::OutputSpike | LogKind::WeightChange { .. } => 1,
            LogKind::ReadStart
            | LogKind::ReadDone { .. }
            | LogKind::WriteStart { .. }
            | LogKind::WriteDone { .. }
            | LogKind::Interrupt => 2,
            LogKind::MonitorSpike => 3,
        }
    }
}

/// One entry of the run log; `index` is the synapse, register or monitor channel.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogEvent {
    pub t_ns: u64,
    pub core: u8,
    pub neuron: u8,
    pub index: u8,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub kind: LogKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub channel: u8,
    pub monitor: Monitor,
    /// `(t_ns, value)` in the signal's SI unit.
    pub samples: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub log: Vec<LogEvent>,
    pub traces: Vec<Trace>,
    /// Final binary weights, `neurons × 54` (device read-back when devices are on).
    pub final_weights: Vec<Vec<Binary>>,
    pub registers: RegisterFile,
}

impl RunOutput {
    pub fn count(&self, pred: impl Fn(&LogKind) -> bool) -> usize {
        self.log.iter().filter(|e| pred(&e.kind)).count()
    }

    pub fn output_spikes(&self) -> Vec<LogEvent> {
        self.log.iter().filter(|e| e.kind == LogKind::OutputSpike).copied().collect()
    }
}

/// Returns the final weight matrix of a run.
pub fn read_weight_matrix(out: &RunOutput) -> Vec<Vec<Binary>> {
    out.final_weights.clone()
}

/// One neuron block with everything it owns.
#[derive(Debug, Clone)]
pub struct NeuronBlock {
    pub addr: NeuronAddr,
    params: NeuronParams,
    core: CoreParams,
    neuron: NeuronState,
    exc: FilterState,
    inh: FilterState,
    pub plastic: Vec<SynapseState>,
    traces: NeuronTraces,
    pub pairs: Vec<DifferentialPair>,
    controllers: Vec<ControllerState>,
}

/// The instantiated chip.
#[derive(Debug, Clone)]
pub struct Chip {
    pub blocks: Vec<NeuronBlock>,
}

impl Chip {
    pub fn new(config: &ChipConfig, program: &NetworkProgram) -> Result<Self> {
        program.validate(config)?;
        let template = program.devices.as_ref().map_or_else(default_device, |d| d.template.clone());
        let blocks = (0..config.neurons())
            .map(|i| {
                let addr = NeuronAddr::from_flat(i)?;
                let core = program.core_params(addr.core as usize)?;
                let params = program.neuron_params(config, addr)?;
                let plast = &core.plasticity;
                let mut plastic = Vec::with_capacity(PLASTIC_PER_NEURON);
                let mut pairs = Vec::with_capacity(PLASTIC_PER_NEURON);
                for s in 0..config.plastic_per_neuron {
                    let w = program.initial_weight(addr, s);
                    let v = if w.is_high() { plast.w_max } else { 0.0 };
                    plastic.push(SynapseState::new(plast, v, 0.0)?);
                    pairs.push(DifferentialPair::new(&template, w)?);
                }
                Ok(NeuronBlock {
                    addr,
                    params,
                    neuron: NeuronState::new(&params, 0.0)?,
                    exc: FilterState::new(core.synapses.tau_exc)?,
                    inh: FilterState::new(core.synapses.tau_inh)?,
                    plastic,
                    traces: NeuronTraces::new(plast, 0.0)?,
                    pairs,
                    controllers: alloc::vec![ControllerState::default(); config.plastic_per_neuron],
                    core,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { blocks })
    }

    /// Instantiated synapses, plastic and static.
    pub fn synapse_count(&self) -> usize {
        self.blocks.iter().map(|b| b.plastic.len() + STATIC_PER_NEURON).sum()
    }

    /// Instantiated device slots (two per plastic synapse).
    pub fn device_count(&self) -> usize {
        self.blocks.iter().map(|b| 2 * b.pairs.len()).sum()
    }
}

fn default_device() -> DeviceModel {
    DeviceModel::new(1e9, 100e9, 100e-15).expect("valid default")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Job {
    Input { synapse: u8 },
    WriteDone { synapse: u8, value: Binary },
    Wake { synapse: u8 },
}

impl Job {
    fn class(&self) -> u8 {
        match self {
            Job::Input { .. } => 0,
            Job::WriteDone { .. } | Job::Wake { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Queued {
    tick: u64,
    class: u8,
    seq: u64,
    job: Job,
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.tick, self.class, self.seq).cmp(&(other.tick, other.class, other.seq))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Result of simulating one block.
#[derive(Debug, Clone)]
pub struct BlockOutput {
    log: Vec<LogEvent>,
    traces: Vec<Trace>,
    weights: Vec<Binary>,
}

struct BlockRun<'a> {
    b: NeuronBlock,
    program: &'a NetworkProgram,
    queue: BinaryHeap<Reverse<Queued>>,
    seq: u64,
    log: Vec<LogEvent>,
    monitors: Vec<(u8, Monitor)>,
    samples: Vec<Vec<(u64, f64)>>,
    next_sample: u64,
    t_end: u64,
}

impl BlockRun<'_> {
    fn push(&mut self, tick: u64, job: Job) {
        self.seq += 1;
        self.queue.push(Reverse(Queued { tick, class: job.class(), seq: self.seq, job }));
    }

    fn emit(&mut self, tick: u64, index: u8, kind: LogKind) {
        let a = self.b.addr;
        self.log.push(LogEvent { t_ns: tick, core: a.core, neuron: a.neuron, index, kind });
    }

    fn now(&self) -> f64 {
        self.b.neuron.time()
    }

    fn drive(&self, t: f64) -> Drive {
        let s = &self.b.core.synapses;
        Drive {
            constant: 0.0,
            decaying: alloc::vec![
                DecayingTerm { amplitude: self.b.exc.value_at(t), tau: s.tau_exc },
                DecayingTerm { amplitude: -self.b.inh.value_at(t), tau: s.tau_inh },
            ],
        }
    }

    /// Records every monitor sample up to and including `tick`, reading the
    /// state without modifying it.
    fn sample_until(&mut self, tick: u64) -> Result<()> {
        if self.monitors.is_empty() {
            return Ok(());
        }
        let dt = self.program.sample_dt_ns;
        while self.next_sample <= tick.min(self.t_end) {
            let ts = self.next_sample;
            let t = to_seconds(ts);
            let now = self.now();
            let drive = self.drive(now);
            let (n, _) = advance_with_drive(&self.b.neuron, &self.b.params, &drive, t.max(now))?;
            let tr = self.b.traces.advance(t.max(self.b.traces.post_trace.last_update))?;
            for k in 0..self.monitors.len() {
                let v = match self.monitors[k].1.signal {
                    MonitorSignal::IMem => n.i_mem.value,
                    MonitorSignal::IAhp => n.i_ahp.value,
                    MonitorSignal::ISynExc => self.b.exc.value_at(t),
                    MonitorSignal::ISynInh => self.b.inh.value_at(t),
                    MonitorSignal::PostTrace => tr.post_trace.value,
                    MonitorSignal::Calcium => tr.ca.output(),
                    MonitorSignal::PreTrace { synapse } => self.b.plastic[synapse as usize].pre_trace.value_at(t),
                    MonitorSignal::Weight { synapse } => {
                        let s = &self.b.plastic[synapse as usize];
                        let dt = (t - s.time()).max(0.0);
                        crate::plasticity::bistability_drift(s, &self.b.core.plasticity, dt)?.v_w
                    }
                };
                self.samples[k].push((ts, v));
            }
            self.next_sample += dt;
        }
        Ok(())
    }

    /// Advances the soma to `tick`, handling each output spike on the way.
    /// Returns early, with the soma at the spike, if a spike scheduled new
    /// controller work before `tick`.
    fn advance_to(&mut self, tick: u64) -> Result<()> {
        let target = to_seconds(tick);
        loop {
            if self.now() >= target {
                return Ok(());
            }
            let drive = self.drive(self.now());
            let (st, spike) = advance_to_first_spike(&self.b.neuron, &self.b.params, &drive, target)?;
            match spike {
                None => {
                    self.sample_until(tick)?;
                    self.b.neuron = st;
                    return Ok(());
                }
                Some(ts) => {
                    let spike_tick = to_tick(ts).min(tick);
                    self.sample_until(spike_tick.saturating_sub(1))?;
                    self.b.neuron = st;
                    self.post_spike(ts, spike_tick)?;
                    if self.queue.peek().is_some_and(|q| q.0.tick < tick) {
                        return Ok(());
                    }
                }
            }
        }
    }

    fn post_spike(&mut self, t: f64, tick: u64) -> Result<()> {
        self.emit(tick, 0, LogKind::OutputSpike);
        let plast = self.b.core.plasticity;
        if self.program.learning {
            for s in 0..self.b.plastic.len() {
                let before = self.b.plastic[s].binary_w;
                self.b.plastic[s] = on_post_spike(&self.b.plastic[s], &self.b.traces, &plast, t)?;
                self.weight_changed(s, before, tick)?;
            }
        }
        self.b.traces = self.b.traces.advance(t)?.on_post_spike(&plast, t)?;
        Ok(())
    }

    fn weight_changed(&mut self, s: usize, before: Binary, tick: u64) -> Result<()> {
        let after = self.b.plastic[s].binary_w;
        if after == before {
            return Ok(());
        }
        self.emit(tick, s as u8, LogKind::WeightChange { value: after });
        if self.program.devices.is_some() {
            self.request(s, tick, Request::Write(after))?;
        }
        Ok(())
    }

    fn request(&mut self, s: usize, tick: u64, request: Request) -> Result<()> {
        let timing = self.program.devices.as_ref().map(|d| d.timing).unwrap_or_default();
        let (next, pulses, interrupt) =
            controller_step(&self.b.controllers[s], TimedRequest { t: to_seconds(tick), request }, &timing)?;
        self.b.controllers[s] = next;
        if interrupt {
            self.emit(tick, s as u8, LogKind::Interrupt);
        }
        self.start_pulses(s, &pulses)
    }

    fn start_pulses(&mut self, s: usize, pulses: &[Pulse]) -> Result<()> {
        for p in pulses {
            let start = to_tick(p.window.start);
            let end = to_tick(p.window.end());
            match p.kind {
                PulseKind::Read => {
                    self.emit(start, s as u8, LogKind::ReadStart);
                    self.deliver_read(s, start)?;
                }
                PulseKind::Write(value) => {
                    self.emit(start, s as u8, LogKind::WriteStart { value });
                    self.push(end, Job::WriteDone { synapse: s as u8, value });
                }
            }
            self.push(end, Job::Wake { synapse: s as u8 });
        }
        Ok(())
    }

    /// Reads the pair and injects the normalizer charge into the synapse DPI.
    fn deliver_read(&mut self, s: usize, tick: u64) -> Result<()> {
        let Some(dev) = &self.program.devices else { return Ok(()) };
        let r = read_weight(&self.b.pairs[s], &dev.read)?;
        self.emit(tick, s as u8, LogKind::ReadDone { mean_fraction: r.mean_fraction });
        let t = to_seconds(tick).max(self.now());
        let jump = self.b.core.synapses.plastic_weight * r.mean_fraction;
        self.b.exc = self.b.exc.spike(t, jump)?;
        Ok(())
    }

    fn input(&mut self, s: usize, tick: u64) -> Result<()> {
        self.emit(tick, s as u8, LogKind::InputSpike);
        let t = self.now();
        let syn = self.b.core.synapses;
        match synapse_kind(s) {
            Some(SynapseKind::StaticExc) => self.b.exc = self.b.exc.spike(t, syn.static_exc_weight)?,
            Some(SynapseKind::StaticInh) => self.b.inh = self.b.inh.spike(t, syn.static_inh_weight)?,
            Some(SynapseKind::Plastic) => {
                if self.program.devices.is_some() {
                    self.request(s, tick, Request::Read)?;
                } else if self.b.plastic[s].binary_w.is_high() {
                    self.b.exc = self.b.exc.spike(t, syn.plastic_weight)?;
                }
                if self.program.learning {
                    let before = self.b.plastic[s].binary_w;
                    self.b.plastic[s] = on_pre_spike(&self.b.plastic[s], &self.b.traces, &self.b.core.plasticity, t)?;
                    self.weight_changed(s, before, tick)?;
                }
            }
            None => unreachable!("validated address"),
        }
        Ok(())
    }

    fn run(mut self) -> Result<BlockOutput> {
        let t_end = self.t_end;
        loop {
            let next = self.queue.peek().map(|q| q.0.tick).filter(|&k| k <= t_end);
            let Some(tick) = next else { break };
            self.advance_to(tick)?;
            if self.queue.peek().is_some_and(|q| q.0.tick < tick) {
                continue;
            }
            let Reverse(q) = self.queue.pop().expect("peeked");
            match q.job {
                Job::Input { synapse } => self.input(synapse as usize, q.tick)?,
                Job::WriteDone { synapse, value } => {
                    let s = synapse as usize;
                    let cfg = self.program.devices.as_ref().map(|d| d.write).unwrap_or_default();
                    self.b.pairs[s] = write_pair(&self.b.pairs[s], value, &cfg)?;
                    self.emit(q.tick, synapse, LogKind::WriteDone { value });
                }
                Job::Wake { synapse } => {
                    let s = synapse as usize;
                    let timing = self.program.devices.as_ref().map(|d| d.timing).unwrap_or_default();
                    let mut pulses = Vec::new();
                    self.b.controllers[s].advance_to(to_seconds(q.tick), &timing, &mut pulses)?;
                    self.start_pulses(s, &pulses)?;
                }
            }
        }
        self.advance_to(t_end)?;
        self.sample_until(t_end)?;

        let addr = self.b.addr;
        let mut traces = Vec::with_capacity(self.monitors.len());
        for ((channel, monitor), samples) in self.monitors.iter().zip(self.samples) {
            if let Some(cfg) = monitor.sadc {
                let pts: Vec<(f64, f64)> = samples.iter().map(|&(k, v)| (to_seconds(k), v.max(0.0))).collect();
                for ts in sadc_events(&pts, &cfg, to_seconds(t_end))? {
                    self.log.push(LogEvent {
                        t_ns: to_tick(ts),
                        core: addr.core,
                        neuron: addr.neuron,
                        index: *channel,
                        kind: LogKind::MonitorSpike,
                    });
                }
            }
            traces.push(Trace { channel: *channel, monitor: *monitor, samples });
        }
        let weights = if let Some(dev) = &self.program.devices {
            let cfg = &dev.read;
            self.b.pairs.iter().map(|p| read_weight(p, cfg).map(|r| r.binary)).collect::<Result<Vec<_>>>()?
        } else {
            self.b.plastic.iter().map(|s| s.binary_w).collect()
        };
        Ok(BlockOutput { log: self.log, traces, weights })
    }
}

/// Validated inputs, split by destination.
struct Prepared {
    chip: Chip,
    per_block: Vec<Vec<(u64, u8)>>,
    register_log: Vec<LogEvent>,
    registers: RegisterFile,
}

fn prepare(config: &ChipConfig, program: &NetworkProgram, inputs: &[AerEvent]) -> Result<Prepared> {
    let chip = Chip::new(config, program)?;
    if let Some(k) = first_unsorted(inputs) {
        return Err(Error::NonMonotoneInput { index: k });
    }
    let mut registers = program.initial_registers()?;
    let mut per_block = alloc::vec![Vec::new(); config.neurons()];
    let mut register_log = Vec::new();
    for ev in inputs {
        ev.validate()?;
        match ev.kind {
            EventKind::InputSpike => {
                let addr = NeuronAddr::new(ev.core as usize, ev.neuron as usize)?;
                per_block[addr.flat()].push((ev.t_ns, ev.index));
            }
            EventKind::RegisterWrite => {
                let value = ev.value.ok_or(Error::InvalidParameter { name: "value", value: f64::NAN })?;
                registers.write(ev.core as usize, ev.index as usize, value)?;
                register_log.push(LogEvent {
                    t_ns: ev.t_ns,
                    core: ev.core,
                    neuron: 0,
                    index: ev.index,
                    kind: LogKind::RegisterWrite { value },
                });
            }
            EventKind::RegisterRead => {
                let value = registers.read(ev.core as usize, ev.index as usize)?;
                register_log.push(LogEvent {
                    t_ns: ev.t_ns,
                    core: ev.core,
                    neuron: 0,
                    index: ev.index,
                    kind: LogKind::RegisterRead { value },
                });
            }
            EventKind::OutputSpike | EventKind::MonitorSpike => {
                return Err(Error::InvalidParameter { name: "input kind", value: ev.kind.code() as f64 })
            }
        }
    }
    Ok(Prepared { chip, per_block, register_log, registers })
}

/// Simulates one block; `flat` indexes `Chip::blocks`.
fn run_block(prep: &Prepared, program: &NetworkProgram, flat: usize, t_end: u64) -> Result<BlockOutput> {
    let b = prep.chip.blocks[flat].clone();
    let addr = b.addr;
    let monitors: Vec<(u8, Monitor)> = program
        .monitors
        .iter()
        .enumerate()
        .filter(|(_, m)| m.core == addr.core && m.neuron == addr.neuron)
        .map(|(k, m)| (k as u8, *m))
        .collect();
    let mut run = BlockRun {
        b,
        program,
        queue: BinaryHeap::new(),
        seq: 0,
        log: Vec::new(),
        samples: alloc::vec![Vec::new(); monitors.len()],
        monitors,
        next_sample: 0,
        t_end,
    };
    for &(tick, synapse) in &prep.per_block[flat] {
        if tick <= t_end {
            run.push(tick, Job::Input { synapse });
        }
    }
    run.run()
}

fn log_order(a: &LogEvent, b: &LogEvent) -> Ordering {
    (a.t_ns, a.kind.class(), a.core, a.neuron, a.index).cmp(&(b.t_ns, b.kind.class(), b.core, b.neuron, b.index))
}

/// Runs the chip to `t_end_ns`. `map_blocks(n, f)` must return `f(0..n)` in
/// index order; it may evaluate blocks concurrently.
pub fn run_with(
    config: &ChipConfig,
    program: &NetworkProgram,
    inputs: &[AerEvent],
    t_end_ns: u64,
    map_blocks: impl FnOnce(usize, &(dyn Fn(usize) -> Result<BlockOutput> + Sync)) -> Result<Vec<BlockOutput>>,
) -> Result<RunOutput> {
    let prep = prepare(config, program, inputs)?;
    let n = prep.chip.blocks.len();
    let f = |k: usize| run_block(&prep, program, k, t_end_ns);
    let outputs = map_blocks(n, &f)?;

    let mut log = prep.register_log.clone();
    let mut traces = Vec::new();
    let mut final_weights = Vec::with_capacity(n);
    for out in outputs {
        log.extend(out.log);
        traces.extend(out.traces);
        final_weights.push(out.weights);
    }
    // Stable: equal keys keep block emission order.
    log.sort_by(log_order);
    traces.sort_by_key(|t| t.channel);
    Ok(RunOutput { log, traces, final_weights, registers: prep.registers })
}

/// Serial block evaluation for [`run_with`].
pub fn serial_blocks(n: usize, f: &(dyn Fn(usize) -> Result<BlockOutput> + Sync)) -> Result<Vec<BlockOutput>> {
    (0..n).map(f).collect()
}

/// Runs the chip serially.
pub fn run(config: &ChipConfig, program: &NetworkProgram, inputs: &[AerEvent], t_end_ns: u64) -> Result<RunOutput> {
    run_with(config, program, inputs, t_end_ns, serial_blocks)
}
