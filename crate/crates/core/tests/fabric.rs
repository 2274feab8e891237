use texel_core::fabric::*;
use texel_core::memdevice::DeviceModel;
use texel_core::neuron::{fi_curve, NeuronParams, RateWindow};
use texel_core::rng::{poisson_train, stream, uniform};
use texel_core::Binary;

const SECOND: u64 = 1_000_000_000;

fn dc_program(config: &ChipConfig, dc: impl Fn(usize) -> f64) -> NetworkProgram {
    NetworkProgram { i_dc: Some((0..config.neurons()).map(dc).collect()), ..Default::default() }
}

fn poisson_inputs(seed: u64, rate: f64, t_end: f64, targets: &[(u8, u8, u8)]) -> Vec<AerEvent> {
    let mut evs = Vec::new();
    for (k, &(core, neuron, syn)) in targets.iter().enumerate() {
        let mut r = stream(seed, &[k as u64]);
        for t in poisson_train(&mut r, rate, 0.0, t_end) {
            evs.push(AerEvent::input((t * 1e9).round() as u64, core, neuron, syn));
        }
    }
    evs.sort_by_key(|e| (e.t_ns, e.core, e.neuron, e.index));
    evs
}

fn non_monitor(out: &RunOutput) -> Vec<LogEvent> {
    out.log.iter().filter(|e| e.kind != LogKind::MonitorSpike).copied().collect()
}

#[test]
fn chip_instantiates_full_topology() {
    let config = ChipConfig::default();
    let chip = Chip::new(&config, &NetworkProgram::default()).unwrap();
    assert_eq!(chip.blocks.len(), 180);
    assert_eq!(chip.synapse_count(), 180 * 58);
    assert_eq!(chip.device_count(), 2 * 180 * 54);
    assert_eq!(config.synapses(), chip.synapse_count());
    assert_eq!(config.device_slots(), chip.device_count());
}

#[test]
fn quiet_chip_stays_quiet() {
    let config = ChipConfig::default();
    let out = run(&config, &NetworkProgram::default(), &[], SECOND).unwrap();
    assert!(out.log.is_empty());
    assert!(out.final_weights.iter().flatten().all(|w| *w == Binary::Low));
}

#[test]
fn dc_driven_neuron_matches_single_neuron_curve() {
    let config = ChipConfig::default();
    let dcs = [0.0, 0.8e-9, 1.5e-9, 3e-9];
    let program = dc_program(&config, |k| dcs[k % dcs.len()]);
    let out = run(&config, &program, &[], SECOND).unwrap();
    let rates = fi_curve(&NeuronParams::default(), &dcs, RateWindow { warmup: 0.0, duration: 1.0 }).unwrap();
    for (k, &expect) in rates.iter().enumerate() {
        let addr = NeuronAddr::from_flat(k).unwrap();
        let n = out.output_spikes().iter().filter(|e| e.core == addr.core && e.neuron == addr.neuron).count();
        assert!((n as f64 - expect).abs() <= 1.0, "dc {} got {n} want {expect}", dcs[k]);
    }
}

#[test]
fn runs_are_deterministic_under_any_block_order() {
    let config = ChipConfig { mismatch_sigma: 0.1, seed: 4, ..Default::default() };
    let program = dc_program(&config, |k| 0.5e-9 + 1e-12 * k as f64);
    let inputs = poisson_inputs(9, 40.0, 0.5, &[(0, 0, 0), (0, 0, 54), (1, 89, 56), (1, 3, 10)]);
    let a = run(&config, &program, &inputs, SECOND / 2).unwrap();
    let b = run(&config, &program, &inputs, SECOND / 2).unwrap();
    let reversed = run_with(&config, &program, &inputs, SECOND / 2, |n, f| {
        let mut v = (0..n).rev().map(f).collect::<Result<Vec<_>, _>>()?;
        v.reverse();
        Ok(v)
    })
    .unwrap();
    assert_eq!(a, b);
    assert_eq!(a, reversed);
    assert!(a.log.windows(2).all(|w| w[0].t_ns <= w[1].t_ns));
}

#[test]
fn monitors_do_not_perturb_the_network() {
    let config = ChipConfig::default();
    let mut program = dc_program(&config, |k| if k < 4 { 1.2e-9 } else { 0.0 });
    let inputs = poisson_inputs(2, 80.0, 0.5, &[(0, 0, 0), (0, 1, 1), (0, 2, 54)]);
    let plain = run(&config, &program, &inputs, SECOND / 2).unwrap();
    program.monitors = vec![
        Monitor { core: 0, neuron: 0, signal: MonitorSignal::IMem, sadc: Some(SadcConfig::default()) },
        Monitor { core: 0, neuron: 0, signal: MonitorSignal::Weight { synapse: 0 }, sadc: None },
        Monitor { core: 0, neuron: 1, signal: MonitorSignal::Calcium, sadc: None },
        Monitor { core: 0, neuron: 2, signal: MonitorSignal::ISynExc, sadc: None },
    ];
    let watched = run(&config, &program, &inputs, SECOND / 2).unwrap();
    assert_eq!(non_monitor(&plain), non_monitor(&watched));
    assert_eq!(plain.final_weights, watched.final_weights);
    assert_eq!(watched.traces.len(), 4);
    assert!(watched.traces.iter().all(|t| t.samples.len() == 5001));
    assert!(watched.count(|k| *k == LogKind::MonitorSpike) > 0);
    let imem = &watched.traces[0].samples;
    assert!(imem.iter().any(|&(_, v)| v > 0.5e-9));
}

#[test]
fn frozen_weights_read_back_unchanged() {
    let config = ChipConfig::default();
    let mut r = stream(5, &[]);
    let matrix: Vec<Vec<Binary>> =
        (0..180).map(|_| (0..54).map(|_| Binary::from_bool(uniform(&mut r) < 0.5)).collect()).collect();
    let inputs = poisson_inputs(1, 100.0, 0.2, &[(0, 0, 0), (0, 0, 1), (1, 5, 7)]);
    for devices in [None, Some(DeviceModel::new(1e9, 100e9, 100e-15).unwrap())] {
        let mut program = dc_program(&config, |_| 1.5e-9);
        program.learning = false;
        program.devices = devices.map(|template| DeviceConfig {
            template,
            read: Default::default(),
            write: Default::default(),
            timing: Default::default(),
        });
        program_weight_matrix(&mut program, &config, &matrix).unwrap();
        let out = run(&config, &program, &inputs, SECOND / 5).unwrap();
        assert_eq!(read_weight_matrix(&out), matrix);
        assert_eq!(out.count(|k| matches!(k, LogKind::WeightChange { .. })), 0);
    }
}

#[test]
fn bad_matrix_shape_is_rejected() {
    let config = ChipConfig::default();
    let mut program = NetworkProgram::default();
    let short = vec![vec![Binary::Low; 53]; 180];
    assert!(program_weight_matrix(&mut program, &config, &short).is_err());
    assert!(program_weight_matrix(&mut program, &config, &uniform_weights(&config, Binary::High)).is_ok());
}

#[test]
fn learning_writes_devices_and_weights_follow() {
    let config = ChipConfig::default();
    let mut program = dc_program(&config, |k| if k == 0 { 2.5e-9 } else { 0.0 });
    program.devices = Some(DeviceConfig {
        template: DeviceModel::new(1e9, 100e9, 100e-15).unwrap(),
        read: Default::default(),
        write: Default::default(),
        timing: Default::default(),
    });
    let targets: Vec<(u8, u8, u8)> = (0..8).map(|s| (0, 0, s)).collect();
    let inputs = poisson_inputs(3, 60.0, 1.0, &targets);
    let out = run(&config, &program, &inputs, SECOND).unwrap();
    let changes = out.count(|k| matches!(k, LogKind::WeightChange { .. }));
    assert!(changes > 0);
    let writes = out.count(|k| matches!(k, LogKind::WriteDone { .. }));
    assert!(writes > 0 && writes <= changes);
    assert_eq!(out.count(|k| *k == LogKind::ReadStart), out.count(|k| matches!(k, LogKind::ReadDone { .. })));
    // Final device state is the last weight each synapse was told to hold.
    for s in 0..8u8 {
        let last = out
            .log
            .iter()
            .filter(|e| e.core == 0 && e.neuron == 0 && e.index == s)
            .filter_map(|e| match e.kind {
                LogKind::WeightChange { value } => Some(value),
                _ => None,
            })
            .next_back()
            .unwrap_or(Binary::Low);
        assert_eq!(out.final_weights[0][s as usize], last, "synapse {s}");
    }
    // Untouched neurons keep their weights.
    assert!(out.final_weights[1..].iter().flatten().all(|w| *w == Binary::Low));
}

#[test]
fn output_spikes_never_precede_their_cause() {
    let config = ChipConfig::default();
    let program =
        NetworkProgram { synapses: SynapseConfig { static_exc_weight: 2e-9, ..Default::default() }, ..Default::default() };
    let inputs = poisson_inputs(8, 50.0, 0.4, &[(0, 7, 54), (1, 0, 55)]);
    let out = run(&config, &program, &inputs, SECOND / 2).unwrap();
    let spikes = out.output_spikes();
    assert!(!spikes.is_empty());
    for s in &spikes {
        assert!((s.core, s.neuron) == (0, 7) || (s.core, s.neuron) == (1, 0));
        let first = inputs.iter().find(|e| e.core == s.core && e.neuron == s.neuron).unwrap();
        assert!(s.t_ns > first.t_ns);
    }
}

#[test]
fn inhibition_suppresses_firing() {
    let config = ChipConfig::default();
    let program = dc_program(&config, |k| if k < 2 { 1.5e-9 } else { 0.0 });
    let inhib = poisson_inputs(6, 400.0, 1.0, &[(0, 1, 56), (0, 1, 57)]);
    let out = run(&config, &program, &inhib, SECOND).unwrap();
    let count = |n: u8| out.output_spikes().iter().filter(|e| e.core == 0 && e.neuron == n).count();
    assert!(count(1) < count(0), "{} vs {}", count(1), count(0));
}

#[test]
fn registers_are_written_and_read_in_order() {
    let config = ChipConfig::default();
    let w = AerEvent { t_ns: 10, kind: EventKind::RegisterWrite, core: 1, neuron: 0, index: 63, value: Some(0x7F_FFFF) };
    let r = AerEvent { t_ns: 20, kind: EventKind::RegisterRead, core: 1, neuron: 0, index: 63, value: None };
    let out = run(&config, &NetworkProgram::default(), &[w, r], 100).unwrap();
    assert_eq!(out.log.len(), 2);
    assert_eq!(out.log[1].kind, LogKind::RegisterRead { value: 0x7F_FFFF });
    assert_eq!(out.registers.read(1, 63).unwrap(), 0x7F_FFFF);
    let too_big = AerEvent { value: Some(1 << 23), ..w };
    assert!(run(&config, &NetworkProgram::default(), &[too_big], 100).is_err());
}

#[test]
fn malformed_inputs_are_rejected() {
    let config = ChipConfig::default();
    let p = NetworkProgram::default();
    let unsorted = [AerEvent::input(5, 0, 0, 0), AerEvent::input(4, 0, 0, 0)];
    assert!(run(&config, &p, &unsorted, 10).is_err());
    for bad in [AerEvent::input(0, 2, 0, 0), AerEvent::input(0, 0, 90, 0), AerEvent::input(0, 0, 0, 58)] {
        assert!(run(&config, &p, &[bad], 10).is_err());
    }
    let wrong_size = ChipConfig { neurons_per_core: 64, ..config };
    assert!(run(&wrong_size, &p, &[], 10).is_err());
}

#[test]
fn mismatch_spreads_rates_but_keeps_each_curve_monotone() {
    let dcs = [0.8e-9, 1.5e-9, 3e-9];
    for sigma in [0.0, 0.2] {
        let config = ChipConfig { mismatch_sigma: sigma, seed: 11, ..Default::default() };
        let counts: Vec<Vec<usize>> = dcs
            .iter()
            .map(|&dc| {
                let out = run(&config, &dc_program(&config, |_| dc), &[], SECOND / 2).unwrap();
                let mut c = vec![0; 180];
                for e in out.output_spikes() {
                    c[NeuronAddr::new(e.core as usize, e.neuron as usize).unwrap().flat()] += 1;
                }
                c
            })
            .collect();
        for (n, ((a, b), c)) in counts[0].iter().zip(&counts[1]).zip(&counts[2]).enumerate() {
            assert!(a <= b && b <= c, "neuron {n}");
        }
        let spread = counts[1].iter().max().unwrap() - counts[1].iter().min().unwrap();
        if sigma == 0.0 {
            assert_eq!(spread, 0);
        } else {
            assert!(spread > 2, "{spread}");
        }
    }
}
