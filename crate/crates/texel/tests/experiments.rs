use texel::experiments::device::{brackets, CompatSummary};
use texel::experiments::{run_in_memory, shipped_config, validate_config, ControllerScenario, Outputs};
use texel::Context;

fn run(name: &str, overrides: &[&str], jobs: usize) -> Outputs {
    let ctx = Context::new(7, jobs).unwrap();
    let overrides: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    let (_, out) = run_in_memory(name, shipped_config(name).unwrap(), &overrides, &ctx).unwrap();
    assert!(out.violations.is_empty(), "{name}: {:?}", out.violations);
    out
}

fn lines(out: &Outputs, file: &str) -> Vec<String> {
    String::from_utf8(out.files[file].clone()).unwrap().lines().map(str::to_owned).collect()
}

#[test]
fn fi_curve_covers_every_neuron() {
    let out = run("fi-curve", &["dc_steps=4", "duration_s=0.2"], 0);
    let rows = lines(&out, "fi_curve.csv");
    assert_eq!(rows[0], "dc_pA,neuron_id,rate_hz");
    assert_eq!(rows.len() - 1, 4 * 180);
    let ids: std::collections::BTreeSet<&str> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(ids.len(), 180);
}

#[test]
fn concurrent_scenario_defers_the_write() {
    let out = run("controller-trace", &[], 1);
    let scenarios: Vec<ControllerScenario> = serde_json::from_slice(&out.files["controller_trace.json"]).unwrap();
    let c = scenarios.iter().find(|s| s.name == "concurrent").unwrap();
    assert!(c.interrupt);
    assert!(c.read_end_s.unwrap() < c.write_start_s.unwrap());
    assert!(scenarios.iter().filter(|s| s.name != "concurrent").all(|s| !s.interrupt));
}

#[test]
fn table1_contour_brackets_ratio_10() {
    let out = run("compat-sweep", &[], 0);
    let t: CompatSummary = serde_json::from_slice(&out.files["table1.json"]).unwrap();
    assert!(t.reference.compatible);
    assert!(brackets(&t.min_ratio, 10.0), "{:?}", t.min_ratio);
    assert_eq!(lines(&out, "compat_ron_ratio.csv")[0], "r_on_ohm,ratio,mean_fraction");
    assert_eq!(lines(&out, "compat_cap_ratio.csv")[0], "cap_f,ratio,mean_fraction");
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    for name in ["srdp", "weights-roundtrip"] {
        assert_eq!(run(name, &[], 1).files, run(name, &[], 3).files, "{name}");
    }
}

#[test]
fn seed_changes_stochastic_outputs() {
    let ctx = |seed| Context::new(seed, 1).unwrap();
    let text = shipped_config("poisson-drive").unwrap();
    let (_, a) = run_in_memory("poisson-drive", text, &[], &ctx(1)).unwrap();
    let (_, b) = run_in_memory("poisson-drive", text, &[], &ctx(2)).unwrap();
    assert_ne!(a.files["poisson_spikes.csv"], b.files["poisson_spikes.csv"]);
}

#[test]
fn invalid_configs_are_reported_not_run() {
    let text = shipped_config("controller-trace").unwrap();
    let r = validate_config("controller-trace", text, &["concurrent_delay_s=1e-3".into()]).unwrap();
    assert_eq!(r.violations.len(), 1);
    assert_eq!(r.violations[0].path, "concurrent_delay_s");
    let ctx = Context::new(0, 1).unwrap();
    assert!(run_in_memory("controller-trace", text, &["concurrent_delay_s=1e-3".into()], &ctx).is_err());
    assert!(run_in_memory("stdp", "bogus = 1\n", &[], &ctx).is_err());
}
