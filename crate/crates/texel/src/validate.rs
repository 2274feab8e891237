//! Static configuration checks. Unlike the model constructors, which stop at
//! the first bad value, these collect every violation with its config path.

use std::fmt;

use serde::Serialize;
use texel_core::fabric::{AerEvent, ChipConfig, DacChannel, DeviceConfig, NetworkProgram};
use texel_core::memdevice::{
    DeviceModel, ReadConfig, Timing, WriteConfig, MAX_PULSE_WIDTH, MIN_PULSE_WIDTH, PADFRAME_MAX_VOLTAGE,
};
use texel_core::neuron::NeuronParams;
use texel_core::plasticity::PlasticityParams;

/// Largest device envelope the read path is rated for.
pub mod envelope {
    pub const MAX_R_ON: f64 = 10e9;
    pub const MIN_RATIO: f64 = 10.0;
    pub const MAX_CAP: f64 = 10e-12;
    /// F/µm² (8.8e-7 F/cm²).
    pub const MAX_CAP_PER_AREA: f64 = 8.8e-15;
    /// µm².
    pub const MAX_AREA: f64 = 114.0;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn push(&mut self, path: &str, message: impl Into<String>) {
        self.violations.push(Violation { path: path.to_owned(), message: message.into() });
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn model(&mut self, path: &str, r: texel_core::Result<()>) {
        if let Err(e) = r {
            self.push(path, e.to_string());
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            if v.path.is_empty() {
                write!(f, "{}", v.message)?;
            } else {
                write!(f, "{}: {}", v.path, v.message)?;
            }
        }
        Ok(())
    }
}

pub trait Validate {
    fn validate(&self, report: &mut Report);
}

fn join(path: &str, field: &str) -> String {
    if path.is_empty() {
        field.to_owned()
    } else {
        format!("{path}.{field}")
    }
}

pub fn pulse_width(report: &mut Report, path: &str, w: f64) {
    if !(MIN_PULSE_WIDTH..=MAX_PULSE_WIDTH).contains(&w) {
        report.push(path, format!("pulse width {w} s outside the supported 10 ns to 100 ms range"));
    }
}

fn voltage(report: &mut Report, path: &str, v: f64) {
    if !(v.abs() <= PADFRAME_MAX_VOLTAGE) {
        report.push(path, format!("{v} V exceeds the ±{PADFRAME_MAX_VOLTAGE} V padframe range"));
    }
}

fn positive(report: &mut Report, path: &str, x: f64) {
    if !(x > 0.0 && x.is_finite()) {
        report.push(path, format!("must be positive and finite, got {x}"));
    }
}

pub fn device(report: &mut Report, path: &str, d: &DeviceModel) {
    use envelope::*;
    report.model(path, d.validate());
    if d.r_on > MAX_R_ON {
        report.push(&join(path, "r_on"), format!("{:e} Ω above the {MAX_R_ON:e} Ω envelope", d.r_on));
    }
    if d.ratio() < MIN_RATIO {
        report.push(&join(path, "r_off"), format!("on/off ratio {:.3} below the minimum of {MIN_RATIO}", d.ratio()));
    }
    if d.cap > MAX_CAP {
        report.push(&join(path, "cap"), format!("{:e} F above the {MAX_CAP:e} F envelope", d.cap));
    }
    if d.area > MAX_AREA {
        report.push(&join(path, "area"), format!("{} µm² above the {MAX_AREA} µm² envelope", d.area));
    }
    if d.area > 0.0 && d.cap / d.area > MAX_CAP_PER_AREA {
        report.push(&join(path, "cap"), format!("{:.3e} F/cm² above the 8.8e-7 F/cm² envelope", d.cap / d.area * 1e8));
    }
    voltage(report, &join(path, "v_set"), d.v_set);
    voltage(report, &join(path, "v_reset"), d.v_reset);
}

pub fn read(report: &mut Report, path: &str, r: &ReadConfig) {
    pulse_width(report, &join(path, "pulse_width"), r.pulse_width);
    if !(0.0..=PADFRAME_MAX_VOLTAGE).contains(&r.v_read) {
        report.push(&join(path, "v_read"), format!("{} V outside 0 to {PADFRAME_MAX_VOLTAGE} V", r.v_read));
    }
    positive(report, &join(path, "norm_bias"), r.norm_bias);
    if !(r.binarize_threshold > 0.0 && r.binarize_threshold < 1.0) {
        report.push(&join(path, "binarize_threshold"), "must lie strictly between 0 and 1");
    }
    if r.trace_points < 2 {
        report.push(&join(path, "trace_points"), "need at least 2 points");
    }
}

pub fn write(report: &mut Report, path: &str, w: &WriteConfig) {
    pulse_width(report, &join(path, "pulse_width"), w.pulse_width);
    voltage(report, &join(path, "v_set"), w.v_set);
    voltage(report, &join(path, "v_reset"), w.v_reset);
}

pub fn timing(report: &mut Report, path: &str, t: &Timing) {
    pulse_width(report, &join(path, "read_width"), t.read_width);
    pulse_width(report, &join(path, "write_width"), t.write_width);
    report.model(path, t.validate());
}

pub fn neuron(report: &mut Report, path: &str, p: &NeuronParams) {
    report.model(path, p.validate());
}

pub fn plasticity(report: &mut Report, path: &str, p: &PlasticityParams) {
    report.model(path, p.validate());
}

pub fn dac(report: &mut Report, path: &str, c: &DacChannel) {
    report.model(path, c.validate());
}

pub fn chip(report: &mut Report, path: &str, c: &ChipConfig) {
    report.model(path, c.validate());
}

pub fn device_config(report: &mut Report, path: &str, d: &DeviceConfig) {
    device(report, &join(path, "template"), &d.template);
    read(report, &join(path, "read"), &d.read);
    write(report, &join(path, "write"), &d.write);
    timing(report, &join(path, "timing"), &d.timing);
}

pub fn program(report: &mut Report, path: &str, config: &ChipConfig, p: &NetworkProgram) {
    chip(report, &join(path, "chip"), config);
    neuron(report, &join(path, "neuron"), &p.neuron);
    plasticity(report, &join(path, "plasticity"), &p.plasticity);
    if let Some(d) = &p.devices {
        device_config(report, &join(path, "devices"), d);
    }
    for (k, b) in p.dac.iter().enumerate() {
        dac(report, &format!("{}[{k}].channel", join(path, "dac")), &b.channel);
    }
    if report.is_empty() {
        // Everything else (shapes, monitor and register addresses) in one pass.
        report.model(path, p.validate(config));
    }
}

/// Address and ordering checks on a stimulus file.
pub fn stimulus(report: &mut Report, events: &[AerEvent]) {
    let mut last = 0;
    for (k, ev) in events.iter().enumerate() {
        let path = format!("event[{k}]");
        if let Err(e) = ev.validate() {
            report.push(&path, e.to_string());
        }
        if ev.t_ns < last {
            report.push(&path, format!("timestamp {} ns earlier than the previous {last} ns", ev.t_ns));
        }
        last = last.max(ev.t_ns);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn long_pulse_is_reported_with_range() {
        let mut r = Report::default();
        read(&mut r, "read", &ReadConfig { pulse_width: 1.0, ..Default::default() });
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].path, "read.pulse_width");
        assert!(r.violations[0].message.contains("10 ns to 100 ms"));
    }

    #[test]
    fn synapse_58_is_out_of_bounds() {
        let mut r = Report::default();
        stimulus(&mut r, &[AerEvent::input(0, 0, 0, 57), AerEvent::input(1, 0, 0, 58)]);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].path, "event[1]");
    }

    #[test]
    fn device_envelope() {
        let mut r = Report::default();
        device(&mut r, "d", &DeviceModel::new(1e9, 100e9, 100e-15).unwrap());
        assert!(r.is_empty(), "{r}");
        device(&mut r, "d", &DeviceModel::new(20e9, 100e9, 20e-12).unwrap());
        let paths: Vec<&str> = r.violations.iter().map(|v| v.path.as_str()).collect();
        assert_eq!(paths, ["d.r_on", "d.r_off", "d.cap"]);
    }

    #[test]
    fn unsorted_stimulus_is_reported() {
        let mut r = Report::default();
        stimulus(&mut r, &[AerEvent::input(5, 0, 0, 0), AerEvent::input(4, 0, 0, 0)]);
        assert_eq!(r.violations.len(), 1);
    }
}
