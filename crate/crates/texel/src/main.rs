use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};
use texel::experiments::{run_experiment, shipped_config, validate_config, ExperimentSpec, NAMES};
use texel::simulate::{simulate, validate_program, SimulateSpec};
use texel::suite::{replay, run_suite};
use texel::validate::{self, Report};
use texel::{io, Manifest};

/// Behavioral simulator of the TEXEL neuromorphic chip.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Random seed; every output is a pure function of config and seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores). Never changes outputs.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// List experiments.
    List,
    /// Run one experiment.
    Run {
        name: String,
        /// TOML file merged over the defaults; the shipped config when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory [default: out/<name>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override a config value, e.g. `--set read.pulse_width=1e-4`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run every experiment with its shipped config.
    Suite {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Print an experiment's shipped config.
    Config { name: String },
    /// Static checks on configs, network programs and stimulus files.
    ///
    /// With no arguments every shipped config is checked.
    Validate {
        /// Experiment whose config to check.
        name: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Network program file (as used by `simulate`).
        #[arg(long, conflicts_with = "name")]
        program: Option<PathBuf>,
        /// AER stimulus file (JSON lines, or binary with .aer/.bin).
        #[arg(long)]
        stimulus: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run a network program on an AER stimulus.
    Simulate {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        input: Option<PathBuf>,
        /// `neuron_id,synapse,weight` table replacing the program's weights.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value = "out/simulate")]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Rerun the experiment recorded in a manifest and compare output hashes.
    Replay {
        manifest: PathBuf,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

fn report_violations(name: &str, m: &Manifest) -> bool {
    for v in &m.violations {
        eprintln!("{name}: violation: {v}");
    }
    m.violations.is_empty()
}

fn print_report(label: &str, r: &Report) -> bool {
    if r.is_empty() {
        println!("{label}: ok");
        true
    } else {
        for v in &r.violations {
            println!("{label}: {}: {}", if v.path.is_empty() { "-" } else { &v.path }, v.message);
        }
        false
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.cmd {
        Cmd::List => {
            for n in NAMES {
                println!("{n}");
            }
            Ok(true)
        }
        Cmd::Config { name } => {
            print!("{}", shipped_config(&name)?);
            Ok(true)
        }
        Cmd::Run { name, config, out, overrides, common } => {
            let out = out.unwrap_or_else(|| PathBuf::from("out").join(&name));
            let spec =
                ExperimentSpec { name: name.clone(), config, seed: common.seed, out: out.clone(), overrides, jobs: common.jobs };
            let m = run_experiment(&spec)?;
            println!("{name}: {} files in {}", m.outputs.len(), out.display());
            Ok(report_violations(&name, &m))
        }
        Cmd::Suite { out, common } => {
            let manifests = run_suite(&out, common.seed, common.jobs)?;
            let mut ok = true;
            for m in &manifests {
                println!("{}: {} files, {} violations", m.experiment, m.outputs.len(), m.violations.len());
                ok &= report_violations(&m.experiment, m);
            }
            Ok(ok)
        }
        Cmd::Validate { name, config, program, stimulus, overrides } => {
            let mut ok = true;
            if let Some(p) = &program {
                ok &= print_report(&p.display().to_string(), &validate_program(p, &overrides, None)?);
            }
            if let Some(n) = &name {
                let text = match &config {
                    Some(p) => std::fs::read_to_string(p).with_context(|| p.display().to_string())?,
                    None => shipped_config(n)?.to_owned(),
                };
                ok &= print_report(n, &validate_config(n, &text, &overrides)?);
            }
            if let Some(s) = &stimulus {
                let mut r = Report::default();
                validate::stimulus(&mut r, &io::read_aer(s)?);
                ok &= print_report(&s.display().to_string(), &r);
            }
            if name.is_none() && program.is_none() && stimulus.is_none() {
                for n in NAMES {
                    ok &= print_report(n, &validate_config(n, shipped_config(n)?, &overrides)?);
                }
            }
            Ok(ok)
        }
        Cmd::Simulate { program, input, weights, out, overrides, common } => {
            let spec =
                SimulateSpec { program, input, weights, seed: common.seed, out: out.clone(), overrides, jobs: common.jobs };
            let m = simulate(&spec)?;
            println!("simulate: {} files in {}", m.outputs.len(), out.display());
            Ok(true)
        }
        Cmd::Replay { manifest, jobs } => {
            let bad = replay(&manifest, jobs)?;
            for b in &bad {
                println!("{}: expected {:?}, got {:?}", b.file, b.expected, b.found);
            }
            if bad.is_empty() {
                println!("{}: identical", manifest.display());
            }
            Ok(bad.is_empty())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
