use alloc::vec::Vec;

use super::device::{device_current, DeviceModel, DifferentialPair, ResistiveState};
use crate::error::{finite, positive, Error, Result};
use crate::Binary;

pub const PADFRAME_MAX_VOLTAGE: f64 = 5.0;
pub const MIN_PULSE_WIDTH: f64 = 10e-9;
pub const MAX_PULSE_WIDTH: f64 = 100e-3;

/// Rectified normalized discrepancy `nb · max(0, (ip − in)/(ip + in))`.
pub fn normalizer(i_pos: f64, i_neg: f64, norm_bias: f64) -> f64 {
    let sum = i_pos + i_neg;
    if !(sum > 0.0) || i_pos <= i_neg {
        return 0.0;
    }
    norm_bias * (i_pos - i_neg) / sum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ReadMode {
    #[default]
    Pulsed,
    /// Read line held high: the capacitive transient has long settled.
    Continuous,
    /// Devices pre-charged between reads: no transient at pulse onset.
    Precharge,
}

/// Model of the charging current drawn at the onset of a pulsed read.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum CapTransient {
    /// Each branch charges its device capacitance through a common read-path
    /// source resistance: `i_cap = v/r_source · e^{−t/(r_source·C)}`, the same
    /// in both branches, so it dilutes the normalized discrepancy.
    SourceRc { r_source: f64 },
    /// Charging through the device itself, as in [`device_current`].
    DeviceRc,
}

impl Default for CapTransient {
    fn default() -> Self {
        CapTransient::SourceRc { r_source: 200e6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ReadConfig {
    pub v_read: f64,
    pub pulse_width: f64,
    pub norm_bias: f64,
    pub mode: ReadMode,
    pub transient: CapTransient,
    /// Mean fraction of `norm_bias` at or above which the read is `high`.
    pub binarize_threshold: f64,
    /// Points in the returned trace.
    pub trace_points: usize,
}

impl Default for ReadConfig {
    fn default() -> Self {
        Self {
            v_read: 0.5,
            pulse_width: 500e-6,
            norm_bias: 200e-9,
            mode: ReadMode::Pulsed,
            transient: CapTransient::default(),
            binarize_threshold: 0.5,
            trace_points: 101,
        }
    }
}

impl ReadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=PADFRAME_MAX_VOLTAGE).contains(&self.v_read) {
            return Err(Error::VoltageOutOfRange { name: "v_read", value: self.v_read });
        }
        if !(MIN_PULSE_WIDTH..=MAX_PULSE_WIDTH).contains(&self.pulse_width) {
            return Err(Error::InvalidParameter { name: "pulse_width", value: self.pulse_width });
        }
        positive("norm_bias", self.norm_bias)?;
        if !(self.binarize_threshold > 0.0 && self.binarize_threshold < 1.0) {
            return Err(Error::InvalidParameter { name: "binarize_threshold", value: self.binarize_threshold });
        }
        if let CapTransient::SourceRc { r_source } = self.transient {
            positive("r_source", r_source)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadResult {
    /// `(t since onset, i_norm)` samples over the pulse.
    pub trace: Vec<(f64, f64)>,
    pub mean_fraction: f64,
    pub binary: Binary,
}

fn branch_current(dev: &DeviceModel, cfg: &ReadConfig, t: f64) -> Result<f64> {
    let (i_res, i_cap) = device_current(dev, cfg.v_read, t)?;
    let i_cap = match (cfg.mode, cfg.transient) {
        (ReadMode::Continuous | ReadMode::Precharge, _) => 0.0,
        (ReadMode::Pulsed, CapTransient::DeviceRc) => i_cap,
        (ReadMode::Pulsed, CapTransient::SourceRc { r_source }) if dev.cap > 0.0 => {
            cfg.v_read / r_source * libm::exp(-t / (r_source * dev.cap))
        }
        (ReadMode::Pulsed, CapTransient::SourceRc { .. }) => 0.0,
    };
    Ok(i_res + i_cap)
}

fn i_norm(pair: &DifferentialPair, cfg: &ReadConfig, t: f64) -> Result<f64> {
    Ok(normalizer(branch_current(&pair.pos, cfg, t)?, branch_current(&pair.neg, cfg, t)?, cfg.norm_bias))
}

fn transient_taus(pair: &DifferentialPair, cfg: &ReadConfig) -> Vec<f64> {
    if cfg.mode != ReadMode::Pulsed {
        return Vec::new();
    }
    [&pair.pos, &pair.neg]
        .iter()
        .filter(|d| d.cap > 0.0)
        .map(|d| match cfg.transient {
            CapTransient::DeviceRc => d.resistance() * d.cap,
            CapTransient::SourceRc { r_source } => r_source * d.cap,
        })
        .collect()
}

const SIMPSON_INTERVALS: usize = 1000;

fn simpson(f: &mut impl FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let n = SIMPSON_INTERVALS;
    let h = (b - a) / n as f64;
    let mut acc = f(a)? + f(b)?;
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h)?;
    }
    Ok(acc * h / 3.0)
}

/// Reads a pair with one pulse and integrates the normalizer output.
///
/// The mean is a composite Simpson quadrature, refined over the first twenty
/// time constants of each charging transient.
pub fn read_weight(pair: &DifferentialPair, cfg: &ReadConfig) -> Result<ReadResult> {
    cfg.validate()?;
    pair.pos.validate()?;
    pair.neg.validate()?;
    let width = cfg.pulse_width;
    let mut breaks: Vec<f64> = transient_taus(pair, cfg).into_iter().map(|tau| 20.0 * tau).filter(|&b| b < width).collect();
    breaks.push(0.0);
    breaks.push(width);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut f = |t: f64| i_norm(pair, cfg, t);
    let mut integral = 0.0;
    for w in breaks.windows(2) {
        integral += simpson(&mut f, w[0], w[1])?;
    }
    let mean_fraction = (integral / width / cfg.norm_bias).clamp(0.0, 1.0);
    finite("mean_fraction", mean_fraction)?;

    let n = cfg.trace_points.max(2);
    let trace = (0..n)
        .map(|k| {
            let t = width * k as f64 / (n - 1) as f64;
            Ok((t, i_norm(pair, cfg, t)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReadResult { trace, mean_fraction, binary: Binary::from_bool(mean_fraction >= cfg.binarize_threshold) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct WriteConfig {
    pub v_set: f64,
    pub v_reset: f64,
    pub pulse_width: f64,
}

impl Default for WriteConfig {
    fn default() -> Self {
        Self { v_set: 2.0, v_reset: -2.0, pulse_width: 10e-6 }
    }
}

impl WriteConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("v_set", self.v_set), ("v_reset", self.v_reset)] {
            if !(v.abs() <= PADFRAME_MAX_VOLTAGE) {
                return Err(Error::VoltageOutOfRange { name, value: v });
            }
        }
        if !(MIN_PULSE_WIDTH..=MAX_PULSE_WIDTH).contains(&self.pulse_width) {
            return Err(Error::InvalidParameter { name: "pulse_width", value: self.pulse_width });
        }
        Ok(())
    }
}

/// Complementary write: SET one device and RESET the other.
pub fn write_pair(pair: &DifferentialPair, target: Binary, cfg: &WriteConfig) -> Result<DifferentialPair> {
    cfg.validate()?;
    let (p, n) = match target {
        Binary::High => (ResistiveState::Lrs, ResistiveState::Hrs),
        Binary::Low => (ResistiveState::Hrs, ResistiveState::Lrs),
    };
    Ok(DifferentialPair { pos: pair.pos.with_state(p), neg: pair.neg.with_state(n) })
}
