//! Energy ledger: a linear model over event counts, split by power supply.
//!
//! Only the total static power and the analog energy per output spike are
//! measured anchors. The other per-supply coefficients in the default set are
//! rough readings and should be treated as placeholders.

use alloc::vec::Vec;
use core::ops::{Add, Mul};

use crate::error::{non_negative, positive, Result};
use crate::fabric::{LogEvent, LogKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Supply {
    Analog,
    Digital,
    Padframe,
}

impl Supply {
    pub const ALL: [Supply; 3] = [Supply::Analog, Supply::Digital, Supply::Padframe];

    pub fn name(self) -> &'static str {
        match self {
            Supply::Analog => "analog",
            Supply::Digital => "digital",
            Supply::Padframe => "padframe",
        }
    }
}

/// One value per supply.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PerSupply {
    pub analog: f64,
    pub digital: f64,
    pub padframe: f64,
}

impl PerSupply {
    pub fn get(&self, s: Supply) -> f64 {
        match s {
            Supply::Analog => self.analog,
            Supply::Digital => self.digital,
            Supply::Padframe => self.padframe,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { analog: f(self.analog), digital: f(self.digital), padframe: f(self.padframe) }
    }

    pub fn total(&self) -> f64 {
        self.analog + self.digital + self.padframe
    }
}

impl Add for PerSupply {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { analog: self.analog + o.analog, digital: self.digital + o.digital, padframe: self.padframe + o.padframe }
    }
}

impl Mul<f64> for PerSupply {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        self.map(|v| v * k)
    }
}

pub const STATIC_POWER_TOTAL: f64 = 27.4e-6;
pub const ANALOG_ENERGY_PER_SPIKE: f64 = 25.9e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EnergyCoefficients {
    /// W.
    pub p_static: PerSupply,
    /// J per output spike.
    pub e_spike: PerSupply,
    /// J per synaptic operation (one input event).
    pub e_synop: PerSupply,
}

impl Default for EnergyCoefficients {
    fn default() -> Self {
        // Static split chosen to sum to the measured total.
        let digital = 8.2e-6;
        let padframe = 2.1e-6;
        Self {
            p_static: PerSupply { analog: STATIC_POWER_TOTAL - digital - padframe, digital, padframe },
            e_spike: PerSupply { analog: ANALOG_ENERGY_PER_SPIKE, digital: 4.0e-12, padframe: 12.0e-12 },
            e_synop: PerSupply { analog: 1.5e-12, digital: 3.0e-12, padframe: 10.0e-12 },
        }
    }
}

impl EnergyCoefficients {
    pub fn validate(&self) -> Result<()> {
        for s in Supply::ALL {
            non_negative("p_static", self.p_static.get(s))?;
            non_negative("e_spike", self.e_spike.get(s))?;
            non_negative("e_synop", self.e_synop.get(s))?;
        }
        Ok(())
    }

    pub fn per_event(&self, op: Operation) -> PerSupply {
        match op {
            Operation::Spike => self.e_spike,
            Operation::Synop => self.e_synop,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Operation {
    Spike,
    Synop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EventCounts {
    pub spikes: u64,
    pub synops: u64,
}

impl EventCounts {
    /// Output spikes and input spikes of a run log.
    pub fn from_log(log: &[LogEvent]) -> Self {
        log.iter().fold(Self::default(), |mut c, e| {
            match e.kind {
                LogKind::OutputSpike => c.spikes += 1,
                LogKind::InputSpike => c.synops += 1,
                _ => {}
            }
            c
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyReport {
    pub duration: f64,
    pub counts: EventCounts,
    pub static_energy: PerSupply,
    pub dynamic_energy: PerSupply,
    pub total_energy: PerSupply,
    pub mean_power: PerSupply,
    /// Total energy over output spikes, static share included.
    pub total_per_spike: Option<PerSupply>,
    pub total_per_synop: Option<PerSupply>,
}

/// Energy of `counts` over `duration` seconds.
pub fn tally(counts: EventCounts, coeffs: &EnergyCoefficients, duration: f64) -> Result<EnergyReport> {
    positive("duration", duration)?;
    coeffs.validate()?;
    let static_energy = coeffs.p_static * duration;
    let dynamic_energy = coeffs.e_spike * counts.spikes as f64 + coeffs.e_synop * counts.synops as f64;
    let total_energy = static_energy + dynamic_energy;
    let per = |n: u64| (n > 0).then(|| total_energy * (1.0 / n as f64));
    Ok(EnergyReport {
        duration,
        counts,
        static_energy,
        dynamic_energy,
        total_energy,
        mean_power: total_energy * (1.0 / duration),
        total_per_spike: per(counts.spikes),
        total_per_synop: per(counts.synops),
    })
}

/// Tallies a run log.
pub fn tally_log(log: &[LogEvent], coeffs: &EnergyCoefficients, duration: f64) -> Result<EnergyReport> {
    tally(EventCounts::from_log(log), coeffs, duration)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerPoint {
    /// Event rate per unit of the population (Hz).
    pub rate: f64,
    pub dynamic_power: PerSupply,
    pub total_power: PerSupply,
    /// Dynamic energy per event; rate-independent in this model.
    pub dynamic_per_event: PerSupply,
    /// Total power over event rate; `None` at rate 0.
    pub total_per_event: Option<PerSupply>,
}

/// Power as a function of the per-unit event rate over `population` units.
pub fn power_vs_rate(coeffs: &EnergyCoefficients, op: Operation, population: f64, rates: &[f64]) -> Result<Vec<PowerPoint>> {
    coeffs.validate()?;
    positive("population", population)?;
    let e = coeffs.per_event(op);
    rates
        .iter()
        .map(|&rate| {
            non_negative("rate", rate)?;
            let events = rate * population;
            let dynamic_power = e * events;
            let total_power = coeffs.p_static + dynamic_power;
            Ok(PowerPoint {
                rate,
                dynamic_power,
                total_power,
                dynamic_per_event: e,
                total_per_event: (events > 0.0).then(|| total_power * (1.0 / events)),
            })
        })
        .collect()
}
