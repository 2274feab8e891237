//! The experiment catalogue. Each has a typed configuration with
//! defaults, a shipped TOML file, a set of output files and run-time checks
//! whose failures are reported as violations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::{resolve, Resolved};
use crate::error::{Error, Result};
use crate::exec::Context;
use crate::io::{csv_bytes, json_bytes, write_file};
use crate::manifest::{Manifest, CONFIG_FILE, MANIFEST_FILE};
use crate::validate::{Report, Validate};

pub mod device;
pub mod learning;
pub mod neuron;
pub mod peripheral;
pub mod power;
pub mod weights;

pub use device::{CompatSweep, ControllerScenario, ControllerTraceExp, DeviceRatio, DeviceRead};
pub use learning::{Srdp, Stdp, TraceDemo};
pub use neuron::{FiCurve, PoissonDrive, StepAdaptation};
pub use peripheral::{DacTable, SadcCurve};
pub use power::Power;
pub use weights::WeightsRoundtrip;

/// Files produced by a run, plus any invariant violations seen on the way.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: BTreeMap<String, Vec<u8>>,
    pub violations: Vec<String>,
}

impl Outputs {
    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        self.files.insert(name.to_owned(), csv_bytes(header, rows)?);
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        self.files.insert(name.to_owned(), json_bytes(value)?);
        Ok(())
    }

    pub fn bytes(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.insert(name.to_owned(), bytes);
    }

    pub fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.violations.push(message());
        }
    }
}

pub trait Experiment {
    const NAME: &'static str;
    /// Shipped configuration file.
    const CONFIG: &'static str;
    type Config: Serialize + DeserializeOwned + Default + Validate;

    fn run(cfg: &Self::Config, ctx: &Context, out: &mut Outputs) -> Result<()>;
}

macro_rules! registry {
    ($($t:ty),* $(,)?) => {
        /// Experiment names in suite order.
        pub const NAMES: &[&str] = &[$(<$t as Experiment>::NAME),*];

        fn dispatch<V: Visitor>(name: &str, v: V) -> Result<V::Out> {
            $(if name == <$t as Experiment>::NAME {
                return v.visit::<$t>();
            })*
            Err(Error::UnknownExperiment(name.to_owned()))
        }
    };
}

registry!(
    FiCurve,
    StepAdaptation,
    PoissonDrive,
    TraceDemo,
    Stdp,
    Srdp,
    DeviceRead,
    DeviceRatio,
    CompatSweep,
    ControllerTraceExp,
    SadcCurve,
    DacTable,
    Power,
    WeightsRoundtrip,
);

trait Visitor {
    type Out;
    fn visit<E: Experiment>(self) -> Result<Self::Out>;
}

/// Shipped configuration text of an experiment.
pub fn shipped_config(name: &str) -> Result<&'static str> {
    struct V;
    impl Visitor for V {
        type Out = &'static str;
        fn visit<E: Experiment>(self) -> Result<&'static str> {
            Ok(E::CONFIG)
        }
    }
    dispatch(name, V)
}

/// What to run and where.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: String,
    /// Configuration file; the shipped one when absent.
    pub config: Option<PathBuf>,
    pub seed: u64,
    pub out: PathBuf,
    pub overrides: Vec<String>,
    /// Worker threads; 0 means all cores. Never affects outputs.
    pub jobs: usize,
}

fn config_text(spec: &ExperimentSpec) -> Result<String> {
    match &spec.config {
        Some(p) => std::fs::read_to_string(p).map_err(crate::error::io_err(p)),
        None => shipped_config(&spec.name).map(str::to_owned),
    }
}

fn resolved<E: Experiment>(text: &str, overrides: &[String]) -> Result<Resolved<E::Config>> {
    resolve::<E::Config>(Some(text), overrides)
}

/// Resolves and statically checks a configuration.
pub fn validate_config(name: &str, text: &str, overrides: &[String]) -> Result<Report> {
    struct V<'a>(&'a str, &'a [String]);
    impl Visitor for V<'_> {
        type Out = Report;
        fn visit<E: Experiment>(self) -> Result<Report> {
            let mut report = Report::default();
            match resolved::<E>(self.0, self.1) {
                Ok(r) => r.value.validate(&mut report),
                Err(e) => report.push("", e.to_string()),
            }
            Ok(report)
        }
    }
    dispatch(name, V(text, overrides))
}

/// Runs an experiment in memory: canonical config text and outputs.
pub fn run_in_memory(name: &str, text: &str, overrides: &[String], ctx: &Context) -> Result<(String, Outputs)> {
    struct V<'a>(&'a str, &'a [String], &'a Context);
    impl Visitor for V<'_> {
        type Out = (String, Outputs);
        fn visit<E: Experiment>(self) -> Result<(String, Outputs)> {
            let r = resolved::<E>(self.0, self.1)?;
            let mut report = Report::default();
            r.value.validate(&mut report);
            if !report.is_empty() {
                return Err(Error::Config(report.to_string()));
            }
            let mut out = Outputs::default();
            E::run(&r.value, self.2, &mut out)?;
            Ok((r.canonical, out))
        }
    }
    dispatch(name, V(text, overrides, ctx))
}

/// Runs an experiment and writes its outputs, resolved config and manifest to `spec.out`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Manifest> {
    let ctx = Context::new(spec.seed, spec.jobs)?;
    let text = config_text(spec)?;
    let (canonical, out) = run_in_memory(&spec.name, &text, &spec.overrides, &ctx)?;
    write_outputs(&spec.out, &spec.name, spec.seed, &canonical, &out)
}

pub fn write_outputs(dir: &Path, name: &str, seed: u64, canonical: &str, out: &Outputs) -> Result<Manifest> {
    let manifest = Manifest::new(name, seed, canonical, &out.files, &out.violations);
    for (file, bytes) in &out.files {
        write_file(&dir.join(file), bytes)?;
    }
    write_file(&dir.join(CONFIG_FILE), canonical.as_bytes())?;
    write_file(&dir.join(MANIFEST_FILE), &json_bytes(&manifest)?)?;
    Ok(manifest)
}

/// Evenly spaced values, endpoints included.
pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let d = (n - 1) as f64;
            (0..n).map(|k| (lo * (d - k as f64) + hi * k as f64) / d).collect()
        }
    }
}

/// `n` values per decade from `10^lo` to `10^hi`.
pub(crate) fn logspace(lo: i32, hi: i32, per_decade: u32) -> Vec<f64> {
    let steps = (hi - lo) as u32 * per_decade;
    (0..=steps).map(|k| 10f64.powf(lo as f64 + k as f64 / per_decade as f64)).collect()
}

/// Seconds to integer nanoseconds.
pub(crate) fn ns(t: f64) -> u64 {
    (t * 1e9).round() as u64
}
