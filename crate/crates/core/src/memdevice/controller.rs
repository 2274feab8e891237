//! Per-synapse arbitration between device reads and writes.
//!
//! Reads take precedence: a write that arrives during a read raises the
//! interrupt flag and waits until the read ends. A read that arrives during a
//! write waits for the write to end. Every pulse is followed by a short bus
//! turnaround; pulses are half-open, so a request at exactly the end of the
//! turnaround finds the controller free.

use alloc::vec::Vec;

use super::read::{MAX_PULSE_WIDTH, MIN_PULSE_WIDTH};
use crate::dynamics::PulseWindow;
use crate::error::{Error, Result};
use crate::Binary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ControllerMode {
    Idle,
    Reading,
    Writing,
    ReadWithPendingWrite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "op", content = "target", rename_all = "snake_case"))]
pub enum Request {
    Read,
    Write(Binary),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimedRequest {
    pub t: f64,
    pub request: Request,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Timing {
    pub read_width: f64,
    pub write_width: f64,
    /// Dead time after each pulse before the next one may start.
    #[cfg_attr(feature = "serde", serde(default = "default_turnaround"))]
    pub turnaround: f64,
}

fn default_turnaround() -> f64 {
    100e-9
}

impl Default for Timing {
    fn default() -> Self {
        Self { read_width: 500e-6, write_width: 10e-6, turnaround: default_turnaround() }
    }
}

impl Timing {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("read_width", self.read_width), ("write_width", self.write_width)] {
            if !(MIN_PULSE_WIDTH..=MAX_PULSE_WIDTH).contains(&w) {
                return Err(Error::InvalidParameter { name, value: w });
            }
        }
        if !(0.0..=MAX_PULSE_WIDTH).contains(&self.turnaround) {
            return Err(Error::InvalidParameter { name: "turnaround", value: self.turnaround });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "op", content = "target", rename_all = "snake_case"))]
pub enum PulseKind {
    Read,
    Write(Binary),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub kind: PulseKind,
    pub window: PulseWindow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub mode: ControllerMode,
    pub interrupt_flag: bool,
    /// Writes waiting for the bus, oldest first.
    pub pending_writes: Vec<Binary>,
    /// A read waiting for the bus.
    pub read_pending: bool,
    /// End of the active pulse.
    pub pulse_end: f64,
    /// End of the active pulse's turnaround.
    pub busy_until: f64,
    /// Time of the last processed request.
    pub now: f64,
}

impl Default for ControllerState {
    fn default() -> Self {
        Self {
            mode: ControllerMode::Idle,
            interrupt_flag: false,
            pending_writes: Vec::new(),
            read_pending: false,
            pulse_end: f64::NEG_INFINITY,
            busy_until: f64::NEG_INFINITY,
            now: f64::NEG_INFINITY,
        }
    }
}

impl ControllerState {
    fn start(&mut self, kind: PulseKind, t: f64, timing: &Timing, out: &mut Vec<Pulse>) -> Result<()> {
        let (width, mode) = match kind {
            PulseKind::Read => (timing.read_width, ControllerMode::Reading),
            PulseKind::Write(_) => (timing.write_width, ControllerMode::Writing),
        };
        let window = PulseWindow::new(t, width)?;
        self.mode = mode;
        self.pulse_end = window.end();
        self.busy_until = window.end() + timing.turnaround;
        out.push(Pulse { kind, window });
        Ok(())
    }

    /// Completes every pulse that ends at or before `t`, starting whatever
    /// was waiting behind it; started pulses are appended to `out`.
    pub fn advance_to(&mut self, t: f64, timing: &Timing, out: &mut Vec<Pulse>) -> Result<()> {
        while self.mode != ControllerMode::Idle && self.busy_until <= t {
            let end = self.busy_until;
            if self.read_pending {
                self.read_pending = false;
                self.start(PulseKind::Read, end, timing, out)?;
            } else if !self.pending_writes.is_empty() {
                let target = self.pending_writes.remove(0);
                self.interrupt_flag = false;
                self.start(PulseKind::Write(target), end, timing, out)?;
            } else {
                self.mode = ControllerMode::Idle;
            }
        }
        Ok(())
    }
}

/// Applies one request. Returns the new state, the pulses started while
/// reaching `req.t` and handling it, and whether the request raised an interrupt.
pub fn controller_step(
    state: &ControllerState,
    req: TimedRequest,
    timing: &Timing,
) -> Result<(ControllerState, Vec<Pulse>, bool)> {
    timing.validate()?;
    if !req.t.is_finite() || req.t < state.now {
        return Err(Error::Ordering { from: state.now, to: req.t });
    }
    let mut s = state.clone();
    let mut pulses = Vec::new();
    s.advance_to(req.t, timing, &mut pulses)?;
    s.now = req.t;
    let mut interrupt = false;
    match (s.mode, req.request) {
        (ControllerMode::Idle, Request::Read) => s.start(PulseKind::Read, req.t, timing, &mut pulses)?,
        (ControllerMode::Idle, Request::Write(v)) => s.start(PulseKind::Write(v), req.t, timing, &mut pulses)?,
        // Served by the read already on the bus.
        (ControllerMode::Reading | ControllerMode::ReadWithPendingWrite, Request::Read) if req.t < s.pulse_end => {}
        (ControllerMode::Reading | ControllerMode::ReadWithPendingWrite, Request::Read) => s.read_pending = true,
        (ControllerMode::Reading | ControllerMode::ReadWithPendingWrite, Request::Write(v)) => {
            s.pending_writes.push(v);
            s.mode = ControllerMode::ReadWithPendingWrite;
            s.interrupt_flag = true;
            interrupt = true;
        }
        (ControllerMode::Writing, Request::Read) => s.read_pending = true,
        (ControllerMode::Writing, Request::Write(v)) => s.pending_writes.push(v),
    }
    Ok((s, pulses, interrupt))
}

/// Every pulse issued for a request schedule, plus interrupt times.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerTrace {
    pub pulses: Vec<Pulse>,
    pub interrupts: Vec<f64>,
    pub final_state: ControllerState,
}

/// Runs a whole schedule to completion.
///
/// Requests are ordered by time, with reads ahead of writes at equal times.
pub fn run_controller(requests: &[TimedRequest], timing: &Timing) -> Result<ControllerTrace> {
    let mut sorted = requests.to_vec();
    sorted.sort_by(|a, b| {
        a.t.total_cmp(&b.t).then_with(|| {
            let rank = |r: &Request| matches!(r, Request::Write(_)) as u8;
            rank(&a.request).cmp(&rank(&b.request))
        })
    });
    let mut state = ControllerState::default();
    let mut pulses = Vec::new();
    let mut interrupts = Vec::new();
    for req in sorted {
        let (next, mut started, interrupt) = controller_step(&state, req, timing)?;
        pulses.append(&mut started);
        if interrupt {
            interrupts.push(req.t);
        }
        state = next;
    }
    state.advance_to(f64::INFINITY, timing, &mut pulses)?;
    Ok(ControllerTrace { pulses, interrupts, final_state: state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn t() -> Timing {
        Timing { read_width: 500e-6, write_width: 100e-6, turnaround: 1e-6 }
    }

    fn read(at: f64) -> TimedRequest {
        TimedRequest { t: at, request: Request::Read }
    }

    fn write(at: f64) -> TimedRequest {
        TimedRequest { t: at, request: Request::Write(Binary::High) }
    }

    #[test]
    fn write_during_read_is_interrupted_and_deferred() {
        let tr = run_controller(&[read(0.0), write(200e-6)], &t()).unwrap();
        assert_eq!(tr.interrupts, [200e-6]);
        let (r, w) = (tr.pulses[0], tr.pulses[1]);
        assert_eq!(r.kind, PulseKind::Read);
        assert!(r.window.end() < w.window.start);
        assert_eq!(w.window.start, 501e-6);
        assert_eq!(tr.final_state.mode, ControllerMode::Idle);
        assert!(!tr.final_state.interrupt_flag);
    }

    #[test]
    fn disjoint_sequences_raise_nothing() {
        let tr = run_controller(&[write(0.0), read(1e-3)], &t()).unwrap();
        assert!(tr.interrupts.is_empty());
        let tr = run_controller(&[read(0.0), write(1e-3)], &t()).unwrap();
        assert!(tr.interrupts.is_empty());
        assert_eq!(tr.pulses.len(), 2);
    }

    #[test]
    fn step_reports_mode_and_flag() {
        let (s, p, i) = controller_step(&ControllerState::default(), read(0.0), &t()).unwrap();
        assert_eq!((s.mode, p.len(), i), (ControllerMode::Reading, 1, false));
        let (s, p, i) = controller_step(&s, write(1e-4), &t()).unwrap();
        assert_eq!((s.mode, p.len(), i), (ControllerMode::ReadWithPendingWrite, 0, true));
        assert!(s.interrupt_flag);
        assert!(controller_step(&s, read(0.0), &t()).is_err());
    }

    #[test]
    fn read_during_write_waits_without_interrupt() {
        let tr = run_controller(&[write(0.0), read(50e-6)], &t()).unwrap();
        assert!(tr.interrupts.is_empty());
        assert_eq!(tr.pulses[1].kind, PulseKind::Read);
        assert_eq!(tr.pulses[1].window.start, 101e-6);
    }

    #[test]
    fn simultaneous_requests_read_first() {
        let tr = run_controller(&[write(0.0), read(0.0)], &t()).unwrap();
        assert_eq!(tr.pulses[0].kind, PulseKind::Read);
        assert_eq!(tr.interrupts, [0.0]);
    }

    #[test]
    fn randomized_schedules_are_safe_and_live() {
        let timing = t();
        for case in 0..10_000u64 {
            let mut r = rng::stream(99, &[case]);
            let n = 1 + (rng::uniform(&mut r) * 12.0) as usize;
            let mut reqs: Vec<TimedRequest> = (0..n)
                .map(|_| {
                    let at = (rng::uniform(&mut r) * 40.0).floor() * 50e-6;
                    if rng::uniform(&mut r) < 0.5 {
                        read(at)
                    } else {
                        TimedRequest { t: at, request: Request::Write(Binary::from_bool(rng::uniform(&mut r) < 0.5)) }
                    }
                })
                .collect();
            reqs.sort_by(|a, b| a.t.total_cmp(&b.t));
            let tr = run_controller(&reqs, &timing).unwrap();

            let mut ps = tr.pulses.clone();
            ps.sort_by(|a, b| a.window.start.total_cmp(&b.window.start));
            for w in ps.windows(2) {
                assert!(w[0].window.end() + timing.turnaround <= w[1].window.start + 1e-15, "overlap in case {case}");
            }
            let writes = reqs.iter().filter(|q| matches!(q.request, Request::Write(_))).count();
            let write_pulses = tr.pulses.iter().filter(|p| matches!(p.kind, PulseKind::Write(_))).count();
            assert_eq!(writes, write_pulses, "lost write in case {case}");
            for q in reqs.iter().filter(|q| q.request == Request::Read) {
                let served =
                    tr.pulses.iter().any(|p| p.kind == PulseKind::Read && (p.window.contains(q.t) || p.window.start >= q.t));
                assert!(served, "unserved read in case {case}");
            }
            assert_eq!(tr.final_state.mode, ControllerMode::Idle);
            assert!(tr.final_state.pending_writes.is_empty() && !tr.final_state.read_pending);
        }
    }
}
