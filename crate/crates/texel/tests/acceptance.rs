//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Every check compares the simulator against an oracle written here, never
//! against a value the simulator reports about itself.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use texel::experiments::{run_in_memory, shipped_config};
use texel::suite::run_suite;
use texel::Context;
use texel_core::dynamics::{FilterState, SoDpiState};
use texel_core::energy::{power_vs_rate, tally, EnergyCoefficients, EventCounts, Operation};
use texel_core::fabric::{Chip, ChipConfig, NetworkProgram};
use texel_core::memdevice::{
    compatibility, device_presets, run_controller, PulseKind, ReadConfig, ReadMode, Request, TimedRequest, Timing,
};
use texel_core::neuron::{fi_curve, sample_membrane, step_response, DecayingTerm, Drive, NeuronParams, NeuronState, RateWindow};
use texel_core::plasticity::{stdp_scan, PairingProtocol, PlasticityParams};
use texel_core::Binary;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn csv_rows(bytes: &[u8]) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_owned).collect();
    r.records().map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(str::to_owned)).collect()).collect()
}

fn num(row: &BTreeMap<String, String>, col: &str) -> f64 {
    row[col].parse().unwrap_or_else(|_| panic!("column {col}: {:?}", row[col]))
}

fn shipped(name: &str, seed: u64) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let ctx = Context::new(seed, 0).map_err(|e| e.to_string())?;
    let (_, out) = run_in_memory(name, shipped_config(name).unwrap(), &[], &ctx).map_err(|e| e.to_string())?;
    ensure(out.violations.is_empty(), || format!("{name}: {}", out.violations.join("; ")))?;
    Ok(out.files)
}

fn topology() -> Check {
    let cfg = ChipConfig::default();
    let chip = Chip::new(&cfg, &NetworkProgram::default()).map_err(|e| e.to_string())?;
    let synapses = chip.synapse_count();
    let devices = chip.device_count();
    ensure(chip.blocks.len() == 2 * 90, || format!("{} neurons", chip.blocks.len()))?;
    ensure(synapses == 10_440, || format!("{synapses} synapses"))?;
    ensure(devices == 19_440, || format!("{devices} devices"))?;
    Ok(format!("{synapses} synapses, {devices} device slots"))
}

fn normalizer_law() -> Check {
    let read = ReadConfig::default();
    let tiny = 1e-21;
    for r in [0.1, 0.5, 0.999, 1.0] {
        let f = compatibility(1e9, r, tiny, &read).map_err(|e| e.to_string())?;
        ensure(f == 0.0, || format!("ratio {r} reads {f}"))?;
    }
    let mut worst = 0.0f64;
    for k in 0..=50 {
        let r = 10f64.powf(0.02 + 4.0 * k as f64 / 50.0);
        let ideal = (r - 1.0) / (r + 1.0);
        let f = compatibility(1e9, r, 0.0, &read).map_err(|e| e.to_string())?;
        worst = worst.max(rel(f, ideal));
    }
    ensure(worst <= 1e-6, || format!("worst relative error {worst:e} against (r-1)/(r+1)"))?;
    let at_1e3 = compatibility(1e9, 1e3, 0.0, &ReadConfig { mode: ReadMode::Continuous, ..read }).map_err(|e| e.to_string())?;
    ensure(at_1e3 >= 0.99, || format!("ratio 1e3 reads {at_1e3} of norm_bias"))?;
    Ok(format!("max rel err {worst:.1e}, r=1e3 -> {at_1e3:.4}"))
}

fn compatibility_point() -> Check {
    let read = ReadConfig::default();
    let reference = compatibility(1e9, 100.0, 100e-15, &read).map_err(|e| e.to_string())?;
    ensure(reference >= 0.5, || format!("reference point reads {reference}"))?;

    let files = shipped("compat-sweep", 0)?;
    let cells: Vec<(f64, f64, f64)> = csv_rows(&files["compat_ron_ratio.csv"])
        .iter()
        .map(|r| (num(r, "r_on_ohm"), num(r, "ratio"), num(r, "mean_fraction")))
        .collect();
    let mut column: Vec<(f64, f64)> = cells.iter().filter(|c| rel(c.0, 1e9) < 1e-9).map(|c| (c.1, c.2)).collect();
    column.sort_by(|a, b| a.0.total_cmp(&b.0));
    ensure(!column.is_empty(), || "no R_on = 1 GΩ column in the sweep".into())?;
    let first = column.iter().position(|c| c.1 >= 0.5).ok_or("no compatible ratio at R_on = 1 GΩ")?;
    ensure(first > 0, || "lowest ratio already compatible".into())?;
    let (lo, hi) = (column[first - 1].0, column[first].0);
    ensure(lo < 10.0 && 10.0 <= hi, || format!("50% contour ({lo}, {hi}] misses ratio 10"))?;
    // One half-decade cell.
    ensure(hi / lo <= 10f64.sqrt() * (1.0 + 1e-9), || format!("contour cell ({lo}, {hi}] wider than the grid"))?;

    let fe = device_presets()
        .into_iter()
        .find(|d| d.preset_name.as_deref() == Some("ferroelectric-hafnia"))
        .ok_or("no ferroelectric preset")?;
    ensure(rel(fe.r_on, 10e9) < 1e-12 && rel(fe.ratio(), 10.0) < 1e-12, || "ferroelectric preset moved".into())?;
    let f = compatibility(fe.r_on, fe.ratio(), fe.cap, &read).map_err(|e| e.to_string())?;
    ensure((0.5..=0.82).contains(&f), || format!("ferroelectric reads {f}"))?;
    Ok(format!("reference {reference:.4}, contour ({lo:.3}, {hi:.3}], ferroelectric {f:.4}"))
}

fn req(t: f64, request: Request) -> TimedRequest {
    TimedRequest { t, request }
}

// Invariants of a complete controller trace against its request schedule.
fn controller_invariants(reqs: &[TimedRequest], timing: &Timing) -> Result<bool, String> {
    let tr = run_controller(reqs, timing).map_err(|e| e.to_string())?;
    let mut pulses = tr.pulses.clone();
    pulses.sort_by(|a, b| a.window.start.total_cmp(&b.window.start));
    for w in pulses.windows(2) {
        let gap = w[1].window.start - w[0].window.end();
        ensure(gap >= timing.turnaround - 1e-15, || format!("pulses overlap or skip turnaround: gap {gap:e}"))?;
    }
    let mut writes: Vec<&TimedRequest> = reqs.iter().filter(|r| matches!(r.request, Request::Write(_))).collect();
    writes.sort_by(|a, b| a.t.total_cmp(&b.t));
    let write_pulses: Vec<_> = pulses.iter().filter(|p| matches!(p.kind, PulseKind::Write(_))).collect();
    ensure(write_pulses.len() == writes.len(), || format!("{} writes issued for {} requests", write_pulses.len(), writes.len()))?;
    for (p, r) in write_pulses.iter().zip(&writes) {
        ensure(p.window.start >= r.t && PulseKind::Write(target(r)) == p.kind, || "write served early or out of order".into())?;
    }
    for r in reqs.iter().filter(|r| r.request == Request::Read) {
        let served = pulses
            .iter()
            .any(|p| p.kind == PulseKind::Read && (p.window.start >= r.t || (p.window.start <= r.t && r.t < p.window.end())));
        ensure(served, || format!("read at {} never served", r.t))?;
    }
    ensure(!tr.final_state.interrupt_flag && tr.final_state.pending_writes.is_empty() && !tr.final_state.read_pending, || {
        "work left pending".into()
    })?;
    Ok(!tr.interrupts.is_empty())
}

fn target(r: &TimedRequest) -> Binary {
    match r.request {
        Request::Write(v) => v,
        Request::Read => unreachable!(),
    }
}

fn controller() -> Check {
    let timing = Timing::default();
    let w = Request::Write(Binary::High);
    let scenario = |reqs: &[TimedRequest]| -> Result<(bool, f64, f64), String> {
        let tr = run_controller(reqs, &timing).map_err(|e| e.to_string())?;
        let read_end = tr.pulses.iter().find(|p| p.kind == PulseKind::Read).map(|p| p.window.end()).ok_or("no read")?;
        let write_start = tr.pulses.iter().find(|p| p.kind != PulseKind::Read).map(|p| p.window.start).ok_or("no write")?;
        controller_invariants(reqs, &timing)?;
        Ok((!tr.interrupts.is_empty(), read_end, write_start))
    };
    let (irq, read_end, write_start) = scenario(&[req(0.0, Request::Read), req(100e-6, w)])?;
    ensure(irq && read_end < write_start, || {
        format!("concurrent: interrupt={irq}, read_end={read_end}, write_start={write_start}")
    })?;
    let (irq, _, _) = scenario(&[req(0.0, w), req(5e-6, Request::Read)])?;
    ensure(!irq, || "write-then-read raised an interrupt".into())?;
    let (irq, _, _) = scenario(&[req(0.0, Request::Read), req(600e-6, w)])?;
    ensure(!irq, || "read-then-write raised an interrupt".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(0xC0);
    let mut interrupted = 0;
    for k in 0..10_000 {
        let n = rng.gen_range(1..12);
        let reqs: Vec<TimedRequest> = (0..n)
            .map(|_| {
                // Integer microseconds so equal times occur.
                let t = rng.gen_range(0..3000) as f64 * 1e-6;
                let r = match rng.gen_range(0..3) {
                    0 => Request::Read,
                    1 => Request::Write(Binary::High),
                    _ => Request::Write(Binary::Low),
                };
                req(t, r)
            })
            .collect();
        interrupted += controller_invariants(&reqs, &timing).map_err(|e| format!("schedule {k}: {e}"))? as usize;
    }
    ensure(interrupted > 0, || "no random schedule exercised the interrupt path".into())?;
    Ok(format!("3 scenarios, 10000 schedules ({interrupted} with interrupts)"))
}

fn neuron() -> Check {
    // F-I monotonicity across the mismatched chip.
    let files = shipped("fi-curve", 0)?;
    let cfg: toml::Value = toml::from_str(shipped_config("fi-curve").unwrap()).unwrap();
    let sigma = cfg.get("mismatch_sigma").and_then(toml::Value::as_float).unwrap_or(0.0);
    ensure(sigma > 0.0, || "shipped fi-curve runs without mismatch".into())?;
    let mut curves: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for r in csv_rows(&files["fi_curve.csv"]) {
        curves.entry(num(&r, "neuron_id") as u64).or_default().push((num(&r, "dc_pA"), num(&r, "rate_hz")));
    }
    ensure(curves.len() == 180, || format!("{} neurons in fi_curve.csv", curves.len()))?;
    let mut distinct = std::collections::BTreeSet::new();
    for (id, c) in &mut curves {
        c.sort_by(|a, b| a.0.total_cmp(&b.0));
        ensure(c.windows(2).all(|w| w[1].1 >= w[0].1), || format!("neuron {id} F-I curve falls"))?;
        distinct.insert(c.last().unwrap().1.to_bits());
    }
    ensure(distinct.len() > 1, || "mismatch left every neuron identical".into())?;

    // Adaptation shape.
    let p = NeuronParams { ahp_jump: 0.05e-9, ..Default::default() };
    let resp = step_response(&p, 2e-9, 0.1, 2.1, 1e-4).map_err(|e| e.to_string())?;
    let isi: Vec<f64> = resp.spikes.windows(2).map(|w| w[1] - w[0]).collect();
    ensure(isi.len() >= 10, || format!("only {} ISIs", isi.len()))?;
    let steady = isi[isi.len() - 5..].iter().sum::<f64>() / 5.0;
    ensure(isi[0] < steady, || format!("first ISI {} not below steady {steady}", isi[0]))?;
    let rate: Vec<f64> = isi.iter().map(|d| 1.0 / d).collect();
    ensure(rate.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-6)), || "instantaneous rate rises".into())?;
    let plateau = 1.0 / steady;
    ensure(rel(*rate.last().unwrap(), plateau) <= 0.05, || "rate does not settle within 5%".into())?;

    // LIF reduction against τ·ln(g·I / (g·I − θ)) + t_refr.
    let lif = NeuronParams::default().lif();
    let dcs = [1.1e-9, 1.5e-9, 2e-9, 3e-9, 5e-9];
    let measured = fi_curve(&lif, &dcs, RateWindow { warmup: 0.5, duration: 20.0 }).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (&dc, &m) in dcs.iter().zip(&measured) {
        let drive = lif.gain_in * dc;
        let analytic = 1.0 / (lif.tau_mem * (drive / (drive - lif.i_thresh)).ln() + lif.t_refr);
        worst = worst.max(rel(m, analytic));
    }
    ensure(worst <= 0.01, || format!("LIF F-I off by {:.2}%", 100.0 * worst))?;
    Ok(format!(
        "180 monotone (sigma {sigma}), ISI {:.1} -> {:.1} ms, LIF max err {:.2}%",
        1e3 * isi[0],
        1e3 * steady,
        100.0 * worst
    ))
}

// Forward-Euler grid landing exactly on `t` with steps of at most τ/1000.
fn euler_grid(t: f64, tau: f64) -> (usize, f64) {
    let n = (t / (tau / 1000.0)).ceil().max(1.0) as usize;
    (n, t / n as f64)
}

// Pre-trace by explicit Euler steps of τ/1000, then the potentiation rule.
fn dense_pairing(p: &PlasticityParams, dt: f64) -> f64 {
    let (n, h) = euler_grid(dt, p.tau_pre);
    let mut x = p.pre_jump;
    for _ in 0..n {
        x -= h * x / p.tau_pre;
    }
    if p.theta_pre_low <= x && x <= p.theta_pre_high {
        p.pot_gain * x
    } else {
        0.0
    }
}

fn plasticity() -> Check {
    let proto = PairingProtocol::default();
    let grid: Vec<f64> = (-40..=40).filter(|&k| k != 0).map(|k| k as f64 * 1e-3).collect();
    let default = stdp_scan(&PlasticityParams::stdp_default(), &grid, &proto).map_err(|e| e.to_string())?;
    for &(dt, dv) in &default {
        ensure(if dt > 0.0 { dv > 0.0 } else { dv < 0.0 }, || format!("default window: Δt {dt} gives Δv {dv}"))?;
    }
    let biased = stdp_scan(&PlasticityParams::stdp_biased(), &grid, &proto).map_err(|e| e.to_string())?;
    let causal: Vec<_> = biased.iter().filter(|p| p.0 > 0.0).collect();
    ensure(causal[0].1 > 0.0, || "biased window does not potentiate at short Δt".into())?;
    ensure(causal.iter().any(|p| p.1 < 0.0), || "biased window has no depressive lobe for Δt > 0".into())?;

    // Closed form against the scan and against the dense-step oracle.
    let p = PlasticityParams::stdp_default();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for k in 1..=40 {
        let dt = k as f64 * 1e-3;
        let closed = p.pot_gain * p.pre_jump * (-dt / p.tau_pre).exp();
        if closed < p.pot_gain * p.theta_pre_low * 1.02 {
            continue;
        }
        let scan = stdp_scan(&p, &[dt], &proto).map_err(|e| e.to_string())?[0].1;
        worst = worst.max(rel(scan, closed)).max(rel(dense_pairing(&p, dt), closed));
        cases += 1;
    }
    ensure(cases >= 30, || format!("only {cases} delays inside the pre-trace window"))?;
    ensure(worst <= 0.01, || format!("Δw off the closed form by {:.3}%", 100.0 * worst))?;

    // SRDP map with the shipped 20-trial protocol.
    let cfg: toml::Value = toml::from_str(shipped_config("srdp").unwrap()).unwrap();
    let trials = cfg.get("protocol").and_then(|p| p.get("trials")).and_then(toml::Value::as_integer);
    ensure(trials.is_none() || trials == Some(20), || format!("shipped srdp uses {trials:?} trials"))?;
    let files = shipped("srdp", 0)?;
    let mut map: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    for r in csv_rows(&files["srdp.csv"]) {
        map.insert((num(&r, "pre_rate_hz").to_bits(), num(&r, "post_rate_hz").to_bits()), num(&r, "p_high"));
    }
    let mut pre: Vec<f64> = map.keys().map(|k| f64::from_bits(k.0)).collect();
    let mut post: Vec<f64> = map.keys().map(|k| f64::from_bits(k.1)).collect();
    for v in [&mut pre, &mut post] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let s = PlasticityParams::srdp_default();
    // Mean of the calcium cascade under regular firing: unit DC gain, so ν·jump·τ₁.
    let below: Vec<f64> = post.iter().copied().filter(|&nu| nu * s.ca.jump * s.ca.tau1 < s.theta_ca_high).collect();
    let at = |a: f64, b: f64| map[&(a.to_bits(), b.to_bits())];
    for &q in &post {
        ensure(pre.windows(2).all(|w| at(w[1], q) >= at(w[0], q)), || format!("P(high) falls along pre at post {q} Hz"))?;
    }
    for &a in &pre {
        ensure(below.windows(2).all(|w| at(a, w[1]) >= at(a, w[0])), || format!("P(high) falls along post at pre {a} Hz"))?;
    }
    Ok(format!(
        "signs ok, biased lobe ok, Δw max err {:.3}% over {cases} delays, SRDP {}x{} monotone",
        100.0 * worst,
        pre.len(),
        post.len()
    ))
}

fn energy() -> Check {
    let c = EnergyCoefficients::default();
    let idle = tally(EventCounts::default(), &c, 1.0).map_err(|e| e.to_string())?;
    ensure(rel(idle.mean_power.total(), 27.4e-6) <= 1e-12, || format!("static power {:e} W", idle.mean_power.total()))?;
    let busy = tally(EventCounts { spikes: 80, synops: 0 }, &c, 1.0).map_err(|e| e.to_string())?;
    let per_spike = busy.dynamic_energy.analog / 80.0;
    ensure(rel(per_spike, 25.9e-12) <= 1e-12, || format!("analog energy per spike {per_spike:e} J"))?;
    let at80 = power_vs_rate(&c, Operation::Spike, 1.0, &[80.0]).map_err(|e| e.to_string())?;
    ensure(rel(at80[0].dynamic_power.analog / 80.0, 25.9e-12) <= 1e-12, || "curve disagrees at 80 Hz".into())?;

    for op in [Operation::Spike, Operation::Synop] {
        let rates: Vec<f64> = (0..=20).map(|k| 10.0 * k as f64).collect();
        let curve = power_vs_rate(&c, op, 180.0, &rates).map_err(|e| e.to_string())?;
        let (p0, p1) = (curve[0].total_power.total(), curve[1].total_power.total());
        let slope = (p1 - p0) / 10.0;
        for pt in &curve {
            let line = p0 + slope * pt.rate;
            ensure((pt.total_power.total() - line).abs() <= 1e-12 * line, || {
                format!("{op:?} curve leaves its line at {} Hz", pt.rate)
            })?;
        }
    }
    Ok("27.4 µW static, 25.9 pJ/spike at 80 Hz, affine curves".into())
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let key = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(key, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    for (k, jobs) in [1usize, 1, 4].into_iter().enumerate() {
        let dir = tmp.path().join(format!("run{k}"));
        let manifests = run_suite(&dir, 0, jobs).map_err(|e| e.to_string())?;
        for m in &manifests {
            ensure(m.violations.is_empty(), || format!("{}: {}", m.experiment, m.violations.join("; ")))?;
        }
        trees.push(read_tree(&dir));
    }
    let csvs = trees[0].keys().filter(|k| k.ends_with(".csv")).count();
    for (k, t) in trees.iter().enumerate().skip(1) {
        ensure(t.keys().eq(trees[0].keys()), || format!("run {k} wrote a different file set"))?;
        for (name, bytes) in t {
            ensure(*bytes == trees[0][name], || format!("{name} differs in run {k}"))?;
        }
    }
    Ok(format!("{} files ({csvs} CSV) identical across 3 runs, jobs 1/1/4", trees[0].len()))
}

fn numerics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4E);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let (got, want) = match case % 3 {
            0 => {
                let tau = 10f64.powf(rng.gen_range(-4.0..0.0));
                let v0 = 10f64.powf(rng.gen_range(-12.0..-8.0));
                let t = rng.gen_range(0.01..1.5) * tau;
                let got = FilterState::with_value(tau, v0, 0.0).unwrap().advance(t).unwrap().value;
                let (n, h) = euler_grid(t, tau);
                let mut v = v0;
                for _ in 0..n {
                    v -= h * v / tau;
                }
                (got, v)
            }
            1 => {
                let tau1 = 10f64.powf(rng.gen_range(-3.0..0.0));
                let tau2 = tau1 * 10f64.powf(rng.gen_range(-1.0..1.0));
                let (a0, b0) = (rng.gen_range(0.0..1e-9), rng.gen_range(0.0..1e-9));
                let tau = tau1.min(tau2);
                let t = rng.gen_range(0.01..1.5) * tau;
                let mut s = SoDpiState::new(tau1, tau2).unwrap();
                s.stage1.value = a0;
                s.stage2.value = b0;
                let got = s.advance(t).unwrap().output();
                let (n, h) = euler_grid(t, tau);
                let (mut a, mut b) = (a0, b0);
                for _ in 0..n {
                    let (da, db) = (-a / tau1, (a - b) / tau2);
                    a += h * da;
                    b += h * db;
                }
                (got, b)
            }
            _ => {
                // Membrane below the knee under DC plus a decaying synaptic term.
                let p = NeuronParams { tau_mem: 10f64.powf(rng.gen_range(-3.0..-1.0)), ..NeuronParams::default().lif() };
                let dc = rng.gen_range(0.0..0.3e-9);
                let syn = DecayingTerm { amplitude: rng.gen_range(0.0..0.3e-9), tau: 10f64.powf(rng.gen_range(-3.0..-1.0)) };
                let i0 = rng.gen_range(0.0..0.3e-9);
                let mut st = NeuronState::new(&p, 0.0).unwrap();
                st.i_mem.value = i0;
                let tau = p.tau_mem.min(syn.tau);
                let t = rng.gen_range(0.01..1.5) * tau;
                let got = sample_membrane(&st, &p, &Drive { constant: dc, decaying: vec![syn] }, t).unwrap();
                let (n, h) = euler_grid(t, tau);
                let mut i = i0;
                for k in 0..n {
                    let drive = dc + syn.amplitude * (-(k as f64 * h) / syn.tau).exp();
                    i += h * (p.gain_in * drive - i) / p.tau_mem;
                }
                (got, i)
            }
        };
        let err = if want == 0.0 { got.abs() } else { rel(got, want) };
        worst = worst.max(err);
        ensure(err <= 1e-3, || format!("case {case}: closed form {got:e}, Euler {want:e}"))?;
    }
    Ok(format!("1000 cases, max rel err {:.3}%", 100.0 * worst))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("topology", topology),
        ("normalizer-law", normalizer_law),
        ("compatibility", compatibility_point),
        ("controller", controller),
        ("neuron", neuron),
        ("plasticity", plasticity),
        ("energy", energy),
        ("determinism", determinism),
        ("numerics", numerics),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {name:<15} {detail} [{secs:.1} s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name:<15} {why} [{secs:.1} s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
