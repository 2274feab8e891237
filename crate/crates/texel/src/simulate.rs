//! Free-form chip runs: a network program plus an AER stimulus file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use texel_core::energy::{tally_log, EnergyCoefficients};
use texel_core::fabric::{program_weight_matrix, run_with, ChipConfig, NetworkProgram};

use crate::config::resolve;
use crate::error::{Error, Result};
use crate::exec::Context;
use crate::io::{
    csv_bytes, json_bytes, log_jsonl_bytes, parse_weights_csv, read_aer, read_file, trace_csv, trace_file_name, weights_csv,
    write_file,
};
use crate::manifest::{Manifest, CONFIG_FILE, MANIFEST_FILE};
use crate::row;
use crate::validate::{self, Report, Validate};

/// Program file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProgramFile {
    pub chip: ChipConfig,
    pub program: NetworkProgram,
    pub energy: EnergyCoefficients,
    pub t_end_s: f64,
}

impl Default for ProgramFile {
    fn default() -> Self {
        Self {
            chip: ChipConfig::default(),
            program: NetworkProgram::default(),
            energy: EnergyCoefficients::default(),
            t_end_s: 1.0,
        }
    }
}

impl Validate for ProgramFile {
    fn validate(&self, r: &mut Report) {
        validate::program(r, "program", &self.chip, &self.program);
        if let Err(e) = self.energy.validate() {
            r.push("energy", e.to_string());
        }
        if !(self.t_end_s > 0.0 && self.t_end_s.is_finite()) {
            r.push("t_end_s", "must be positive");
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulateSpec {
    pub program: PathBuf,
    pub input: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub seed: u64,
    pub out: PathBuf,
    pub overrides: Vec<String>,
    pub jobs: usize,
}

/// Resolves and checks a program file, a stimulus and an optional weight table.
pub fn validate_program(program: &Path, overrides: &[String], input: Option<&Path>) -> Result<Report> {
    let text = String::from_utf8_lossy(&read_file(program)?).into_owned();
    let mut report = Report::default();
    match resolve::<ProgramFile>(Some(&text), overrides) {
        Ok(r) => r.value.validate(&mut report),
        Err(e) => report.push("", e.to_string()),
    }
    if let Some(p) = input {
        validate::stimulus(&mut report, &read_aer(p)?);
    }
    Ok(report)
}

pub fn simulate(spec: &SimulateSpec) -> Result<Manifest> {
    let text = String::from_utf8_lossy(&read_file(&spec.program)?).into_owned();
    let resolved = resolve::<ProgramFile>(Some(&text), &spec.overrides)?;
    let mut file = resolved.value;
    file.chip.seed = spec.seed;
    if let Some(w) = &spec.weights {
        let matrix = parse_weights_csv(&read_file(w)?, w, file.chip.neurons(), file.chip.plastic_per_neuron)?;
        program_weight_matrix(&mut file.program, &file.chip, &matrix)?;
    }
    let mut report = Report::default();
    file.validate(&mut report);
    let inputs = match &spec.input {
        Some(p) => read_aer(p)?,
        None => Vec::new(),
    };
    validate::stimulus(&mut report, &inputs);
    if !report.is_empty() {
        return Err(Error::Config(report.to_string()));
    }

    let ctx = Context::new(spec.seed, spec.jobs)?;
    let t_end_ns = (file.t_end_s * 1e9).round() as u64;
    let run = run_with(&file.chip, &file.program, &inputs, t_end_ns, ctx.blocks())?;
    let energy = tally_log(&run.log, &file.energy, file.t_end_s)?;

    let mut files = BTreeMap::new();
    files.insert("events.jsonl".to_owned(), log_jsonl_bytes(&run.log)?);
    files.insert("weights.csv".to_owned(), weights_csv(&run.final_weights)?);
    files.insert("energy.json".to_owned(), json_bytes(&energy)?);
    let mut regs = Vec::new();
    for core in 0..file.chip.cores {
        for index in 0..file.chip.registers_per_core {
            regs.push(row![core, index, run.registers.read(core, index)?]);
        }
    }
    files.insert("registers.csv".to_owned(), csv_bytes(&["core", "register", "value"], regs)?);
    for t in &run.traces {
        files.insert(trace_file_name(t), trace_csv(t)?);
    }
    let manifest = Manifest::new("simulate", spec.seed, &resolved.canonical, &files, &[]);
    for (name, bytes) in &files {
        write_file(&spec.out.join(name), bytes)?;
    }
    write_file(&spec.out.join(CONFIG_FILE), resolved.canonical.as_bytes())?;
    write_file(&spec.out.join(MANIFEST_FILE), &json_bytes(&manifest)?)?;
    Ok(manifest)
}
