use serde::{Deserialize, Serialize};
use texel_core::memdevice::{
    compatibility, compatibility_sweep, device_presets, min_compatible, read_weight, run_controller, Axis, CompatPoint,
    DeviceModel, DifferentialPair, Heatmap, PulseKind, ReadConfig, ReadMode, Request, SweepParam, TimedRequest, Timing,
};
use texel_core::Binary;

use super::{ns, Experiment, Outputs};
use crate::error::Result;
use crate::exec::Context;
use crate::row;
use crate::validate::{self, Report, Validate};

fn named_devices(reference: &CompatPoint) -> Result<Vec<(String, DeviceModel)>> {
    let mut out =
        vec![("reference".to_owned(), DeviceModel::new(reference.r_on, reference.r_on * reference.ratio, reference.cap)?)];
    out.extend(device_presets().into_iter().map(|d| (d.preset_name.clone().unwrap_or_default(), d)));
    Ok(out)
}

fn reference_envelope(r: &mut Report, path: &str, p: &CompatPoint) {
    if !(p.r_on > 0.0 && p.ratio > 1.0 && p.cap >= 0.0) {
        r.push(path, "need r_on > 0, ratio > 1 and cap ≥ 0");
    }
}

/// Normalizer output during one read pulse, for both stored values.
pub struct DeviceRead;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceReadConfig {
    pub read: ReadConfig,
    /// Reported alongside the technology presets.
    pub reference: CompatPoint,
}

impl Validate for DeviceReadConfig {
    fn validate(&self, r: &mut Report) {
        validate::read(r, "read", &self.read);
        reference_envelope(r, "reference", &self.reference);
    }
}

impl Experiment for DeviceRead {
    const NAME: &'static str = "device-read";
    const CONFIG: &'static str = include_str!("../../configs/device-read.toml");
    type Config = DeviceReadConfig;

    fn run(cfg: &DeviceReadConfig, _ctx: &Context, out: &mut Outputs) -> Result<()> {
        let mut traces = Vec::new();
        let mut summary = Vec::new();
        for (name, dev) in named_devices(&cfg.reference)? {
            let high = read_weight(&DifferentialPair::new(&dev, Binary::High)?, &cfg.read)?;
            let low = read_weight(&DifferentialPair::new(&dev, Binary::Low)?, &cfg.read)?;
            out.check(low.mean_fraction == 0.0 && low.binary == Binary::Low, || {
                format!("{name}: low weight reads {}", low.mean_fraction)
            });
            out.check(high.mean_fraction > low.mean_fraction, || format!("{name}: high read not above low read"));
            for (w, res) in [(Binary::High, &high), (Binary::Low, &low)] {
                for &(t, i) in &res.trace {
                    out.check(i <= cfg.read.norm_bias, || format!("{name}: normalizer output {i} A above norm_bias"));
                    traces.push(row![name.as_str(), w, ns(t), i]);
                }
                summary.push(row![name.as_str(), w, res.mean_fraction, res.binary]);
            }
        }
        out.csv("device_read_traces.csv", &["device", "weight", "t_ns", "i_norm_a"], traces)?;
        out.csv("device_read_summary.csv", &["device", "weight", "mean_fraction", "binary"], summary)
    }
}

/// Mean fraction against the on/off ratio.
pub struct DeviceRatio;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceRatioConfig {
    pub read: ReadConfig,
    pub r_on: f64,
    pub cap: f64,
    pub ratio: Axis,
    /// Largest relative error to `(r−1)/(r+1)` in continuous mode.
    pub law_tolerance: f64,
}

impl Default for DeviceRatioConfig {
    fn default() -> Self {
        Self {
            read: ReadConfig::default(),
            r_on: 1e9,
            cap: 100e-15,
            ratio: Axis { param: SweepParam::Ratio, min_exp: -1, max_exp: 4, per_decade: 10 },
            law_tolerance: 1e-6,
        }
    }
}

impl Validate for DeviceRatioConfig {
    fn validate(&self, r: &mut Report) {
        validate::read(r, "read", &self.read);
        if !(self.r_on > 0.0 && self.cap >= 0.0) {
            r.push("r_on", "need r_on > 0 and cap ≥ 0");
        }
        if let Err(e) = self.ratio.values() {
            r.push("ratio", e.to_string());
        }
        if self.ratio.param != SweepParam::Ratio {
            r.push("ratio.param", "must be \"ratio\"");
        }
        if !(self.law_tolerance > 0.0) {
            r.push("law_tolerance", "must be positive");
        }
    }
}

/// Ideal C→0 mean fraction.
pub fn ideal_fraction(ratio: f64) -> f64 {
    if ratio <= 1.0 {
        0.0
    } else {
        (ratio - 1.0) / (ratio + 1.0)
    }
}

impl Experiment for DeviceRatio {
    const NAME: &'static str = "device-ratio";
    const CONFIG: &'static str = include_str!("../../configs/device-ratio.toml");
    type Config = DeviceRatioConfig;

    fn run(cfg: &DeviceRatioConfig, _ctx: &Context, out: &mut Outputs) -> Result<()> {
        let continuous = ReadConfig { mode: ReadMode::Continuous, ..cfg.read };
        let mut rows = Vec::new();
        for ratio in cfg.ratio.values()? {
            let ideal = ideal_fraction(ratio);
            let c = compatibility(cfg.r_on, ratio, cfg.cap, &continuous)?;
            let p = compatibility(cfg.r_on, ratio, cfg.cap, &cfg.read)?;
            let ok = if ideal == 0.0 { c == 0.0 } else { ((c - ideal) / ideal).abs() <= cfg.law_tolerance };
            out.check(ok, || format!("ratio {ratio}: continuous fraction {c} vs ideal {ideal}"));
            out.check(p <= c + 1e-12, || format!("ratio {ratio}: pulsed fraction {p} above continuous {c}"));
            rows.push(row![ratio, ideal, c, p]);
        }
        let at_1e3 = compatibility(cfg.r_on, 1e3, cfg.cap, &continuous)?;
        out.check(at_1e3 >= 0.99, || format!("continuous fraction {at_1e3} at ratio 1e3 is more than 1% below norm_bias"));
        out.csv("device_ratio.csv", &["ratio", "ideal_fraction", "continuous_fraction", "pulsed_fraction"], rows)
    }
}

/// Compatibility heatmaps plus a summary of the reference point, the 50% contour and the presets.
pub struct CompatSweep;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompatConfig {
    pub read: ReadConfig,
    pub reference: CompatPoint,
    pub threshold: f64,
    pub r_on: Axis,
    pub ratio: Axis,
    pub cap: Axis,
}

impl Default for CompatConfig {
    fn default() -> Self {
        Self {
            read: ReadConfig::default(),
            reference: CompatPoint::default(),
            threshold: 0.5,
            r_on: Axis { param: SweepParam::ROn, min_exp: 6, max_exp: 11, per_decade: 2 },
            ratio: Axis { param: SweepParam::Ratio, min_exp: 0, max_exp: 4, per_decade: 2 },
            cap: Axis { param: SweepParam::Cap, min_exp: -15, max_exp: -11, per_decade: 2 },
        }
    }
}

impl Validate for CompatConfig {
    fn validate(&self, r: &mut Report) {
        validate::read(r, "read", &self.read);
        reference_envelope(r, "reference", &self.reference);
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            r.push("threshold", "must lie strictly between 0 and 1");
        }
        for (path, axis, param) in [
            ("r_on", &self.r_on, SweepParam::ROn),
            ("ratio", &self.ratio, SweepParam::Ratio),
            ("cap", &self.cap, SweepParam::Cap),
        ] {
            if axis.param != param {
                r.push(&format!("{path}.param"), format!("must be \"{}\"", param_name(param)));
            }
            if let Err(e) = axis.values() {
                r.push(path, e.to_string());
            }
        }
    }
}

fn param_name(p: SweepParam) -> &'static str {
    match p {
        SweepParam::ROn => "r_on",
        SweepParam::Ratio => "ratio",
        SweepParam::Cap => "cap",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub name: String,
    pub r_on_ohm: f64,
    pub ratio: f64,
    pub cap_f: f64,
    pub mean_fraction: f64,
    pub compatible: bool,
}

/// The 50% contour along the ratio axis at the reference R_on: it lies in
/// `(ratio_below, ratio_at]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub r_on_ohm: f64,
    pub cap_f: f64,
    pub threshold: f64,
    pub ratio_below: Option<f64>,
    pub ratio_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatSummary {
    pub reference: PointSummary,
    pub min_ratio: Contour,
    pub presets: Vec<PointSummary>,
}

fn heatmap_rows(map: &Heatmap) -> impl Iterator<Item = Vec<String>> + '_ {
    map.y_values.iter().zip(&map.cells).flat_map(move |(&y, row)| map.x_values.iter().zip(row).map(move |(&x, &c)| row![x, y, c]))
}

/// Whether a contour bracket contains `ratio` within one grid cell.
pub fn brackets(c: &Contour, ratio: f64) -> bool {
    match (c.ratio_below, c.ratio_at) {
        (Some(lo), Some(hi)) => lo < ratio && ratio <= hi,
        _ => false,
    }
}

impl Experiment for CompatSweep {
    const NAME: &'static str = "compat-sweep";
    const CONFIG: &'static str = include_str!("../../configs/compat-sweep.toml");
    type Config = CompatConfig;

    fn run(cfg: &CompatConfig, ctx: &Context, out: &mut Outputs) -> Result<()> {
        let by_ron = compatibility_sweep(&cfg.r_on, &cfg.ratio, &cfg.reference, &cfg.read, ctx.rows())?;
        let by_cap = compatibility_sweep(&cfg.cap, &cfg.ratio, &cfg.reference, &cfg.read, ctx.rows())?;
        let summary = |name: &str, p: CompatPoint| -> Result<PointSummary> {
            let f = compatibility(p.r_on, p.ratio, p.cap, &cfg.read)?;
            Ok(PointSummary {
                name: name.to_owned(),
                r_on_ohm: p.r_on,
                ratio: p.ratio,
                cap_f: p.cap,
                mean_fraction: f,
                compatible: f >= cfg.threshold,
            })
        };
        let reference = summary("reference", cfg.reference)?;
        out.check(reference.compatible, || format!("reference point reads {} of norm_bias", reference.mean_fraction));

        let col = by_ron.nearest(SweepParam::ROn, cfg.reference.r_on).expect("r_on axis");
        let found = min_compatible(&by_ron, SweepParam::Ratio, col, cfg.threshold);
        let min_ratio = Contour {
            r_on_ohm: by_ron.x_values[col],
            cap_f: cfg.reference.cap,
            threshold: cfg.threshold,
            ratio_below: found.and_then(|f| f.0),
            ratio_at: found.map(|f| f.1),
        };
        out.check(brackets(&min_ratio, validate::envelope::MIN_RATIO), || {
            format!(
                "contour ({:?}, {:?}] misses ratio {}",
                min_ratio.ratio_below,
                min_ratio.ratio_at,
                validate::envelope::MIN_RATIO
            )
        });

        let presets = device_presets()
            .into_iter()
            .map(|d| {
                let p = CompatPoint { r_on: d.r_on, ratio: d.ratio(), cap: d.cap };
                summary(d.preset_name.as_deref().unwrap_or_default(), p)
            })
            .collect::<Result<Vec<_>>>()?;

        let header = |m: &Heatmap| [m.x.column(), m.y.column(), "mean_fraction"];
        out.csv("compat_ron_ratio.csv", &header(&by_ron), heatmap_rows(&by_ron))?;
        out.csv("compat_cap_ratio.csv", &header(&by_cap), heatmap_rows(&by_cap))?;
        out.json("table1.json", &CompatSummary { reference, min_ratio, presets })
    }
}

/// Bus activity for the three request orderings.
pub struct ControllerTraceExp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub timing: Timing,
    /// Write request delay after a read request, inside the read.
    pub concurrent_delay_s: f64,
    /// Read request delay after a write request.
    pub write_then_read_delay_s: f64,
    /// Write request delay after a read request, once the read is over.
    pub read_then_write_delay_s: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            timing: Timing::default(),
            concurrent_delay_s: 100e-6,
            write_then_read_delay_s: 5e-6,
            read_then_write_delay_s: 600e-6,
        }
    }
}

impl Validate for ControllerConfig {
    fn validate(&self, r: &mut Report) {
        validate::timing(r, "timing", &self.timing);
        let t = &self.timing;
        if !(self.concurrent_delay_s >= 0.0 && self.concurrent_delay_s < t.read_width) {
            r.push("concurrent_delay_s", "must fall inside the read pulse");
        }
        if !(self.write_then_read_delay_s >= 0.0) {
            r.push("write_then_read_delay_s", "must be non-negative");
        }
        if !(self.read_then_write_delay_s >= t.read_width + t.turnaround) {
            r.push("read_then_write_delay_s", "must fall after the read pulse and its turnaround");
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseRecord {
    pub op: String,
    pub target: Option<Binary>,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerScenario {
    pub name: String,
    pub requests: Vec<TimedRequest>,
    pub interrupt: bool,
    pub interrupts_s: Vec<f64>,
    pub pulses: Vec<PulseRecord>,
    /// End of the first read pulse.
    pub read_end_s: Option<f64>,
    /// Start of the first write pulse.
    pub write_start_s: Option<f64>,
}

pub const SCENARIOS: [&str; 3] = ["concurrent", "write-then-read", "read-then-write"];

impl ControllerScenario {
    pub fn run(name: &str, cfg: &ControllerConfig) -> Result<Self> {
        let read = |t| TimedRequest { t, request: Request::Read };
        let write = |t| TimedRequest { t, request: Request::Write(Binary::High) };
        let requests = match name {
            "concurrent" => vec![read(0.0), write(cfg.concurrent_delay_s)],
            "write-then-read" => vec![write(0.0), read(cfg.write_then_read_delay_s)],
            "read-then-write" => vec![read(0.0), write(cfg.read_then_write_delay_s)],
            other => return Err(crate::error::Error::Config(format!("unknown controller scenario `{other}`"))),
        };
        Self::from_requests(name, requests, &cfg.timing)
    }

    pub fn from_requests(name: &str, requests: Vec<TimedRequest>, timing: &Timing) -> Result<Self> {
        let trace = run_controller(&requests, timing)?;
        let pulses: Vec<PulseRecord> = trace
            .pulses
            .iter()
            .map(|p| {
                let (op, target) = match p.kind {
                    PulseKind::Read => ("read", None),
                    PulseKind::Write(v) => ("write", Some(v)),
                };
                PulseRecord { op: op.into(), target, start_s: p.window.start, end_s: p.window.end() }
            })
            .collect();
        let read_end_s = pulses.iter().find(|p| p.op == "read").map(|p| p.end_s);
        let write_start_s = pulses.iter().find(|p| p.op == "write").map(|p| p.start_s);
        Ok(Self {
            name: name.to_owned(),
            requests,
            interrupt: !trace.interrupts.is_empty(),
            interrupts_s: trace.interrupts,
            pulses,
            read_end_s,
            write_start_s,
        })
    }

    /// No two pulses overlap in time.
    pub fn exclusive(&self) -> bool {
        let mut p: Vec<_> = self.pulses.iter().collect();
        p.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
        p.windows(2).all(|w| w[0].end_s <= w[1].start_s)
    }

    /// Checks the expected outcome of a named scenario.
    pub fn expectation(&self) -> std::result::Result<(), String> {
        if !self.exclusive() {
            return Err("overlapping pulses".into());
        }
        let writes = self.requests.iter().filter(|r| matches!(r.request, Request::Write(_))).count();
        if self.pulses.iter().filter(|p| p.op == "write").count() != writes {
            return Err("a queued write never executed".into());
        }
        match self.name.as_str() {
            "concurrent" => match (self.interrupt, self.read_end_s, self.write_start_s) {
                (true, Some(re), Some(ws)) if re < ws => Ok(()),
                _ => Err(format!(
                    "expected an interrupt and read_end < write_start, got interrupt={} read_end={:?} write_start={:?}",
                    self.interrupt, self.read_end_s, self.write_start_s
                )),
            },
            _ if self.interrupt => Err("unexpected interrupt".into()),
            _ => Ok(()),
        }
    }
}

impl Experiment for ControllerTraceExp {
    const NAME: &'static str = "controller-trace";
    const CONFIG: &'static str = include_str!("../../configs/controller-trace.toml");
    type Config = ControllerConfig;

    fn run(cfg: &ControllerConfig, _ctx: &Context, out: &mut Outputs) -> Result<()> {
        let scenarios = SCENARIOS.iter().map(|n| ControllerScenario::run(n, cfg)).collect::<Result<Vec<_>>>()?;
        for s in &scenarios {
            if let Err(msg) = s.expectation() {
                out.violations.push(format!("{}: {msg}", s.name));
            }
        }
        out.json("controller_trace.json", &scenarios)
    }
}
