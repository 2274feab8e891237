use alloc::string::String;
use alloc::vec::Vec;

use super::read::PADFRAME_MAX_VOLTAGE;
use crate::error::{non_negative, positive, Error, Result};
use crate::Binary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ResistiveState {
    Lrs,
    Hrs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Terminals {
    Two,
    /// Gate-programmed device; read through its channel like a two-terminal one.
    Three,
}

/// A device modelled as a resistor in parallel with a capacitor.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct DeviceModel {
    pub r_on: f64,
    pub r_off: f64,
    pub cap: f64,
    pub state: ResistiveState,
    pub terminals: Terminals,
    pub v_set: f64,
    pub v_reset: f64,
    /// Footprint (µm²).
    pub area: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub preset_name: Option<String>,
}

impl DeviceModel {
    /// Two-terminal device in HRS with ±2 V switching and no area information.
    pub fn new(r_on: f64, r_off: f64, cap: f64) -> Result<Self> {
        let d = Self {
            r_on,
            r_off,
            cap,
            state: ResistiveState::Hrs,
            terminals: Terminals::Two,
            v_set: 2.0,
            v_reset: -2.0,
            area: 0.0,
            preset_name: None,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        positive("r_on", self.r_on)?;
        positive("r_off", self.r_off)?;
        non_negative("cap", self.cap)?;
        non_negative("area", self.area)?;
        if self.r_on >= self.r_off {
            return Err(Error::InvalidParameter { name: "r_off", value: self.r_off });
        }
        for (name, v) in [("v_set", self.v_set), ("v_reset", self.v_reset)] {
            if !(v.abs() <= PADFRAME_MAX_VOLTAGE) {
                return Err(Error::VoltageOutOfRange { name, value: v });
            }
        }
        Ok(())
    }

    pub fn resistance(&self) -> f64 {
        match self.state {
            ResistiveState::Lrs => self.r_on,
            ResistiveState::Hrs => self.r_off,
        }
    }

    pub fn ratio(&self) -> f64 {
        self.r_off / self.r_on
    }

    pub fn with_state(&self, state: ResistiveState) -> Self {
        Self { state, ..self.clone() }
    }
}

/// Resistive and capacitive current through `dev` at `t` after a step to `v`.
///
/// The capacitive part charges through the device itself, `τ = R·C`.
pub fn device_current(dev: &DeviceModel, v: f64, t_since_onset: f64) -> Result<(f64, f64)> {
    non_negative("v", v)?;
    non_negative("t_since_onset", t_since_onset)?;
    let r = dev.resistance();
    let i_res = v / r;
    let i_cap = if dev.cap > 0.0 { i_res * libm::exp(-t_since_onset / (r * dev.cap)) } else { 0.0 };
    Ok((i_res, i_cap))
}

/// Two complementary devices storing one bit: high iff `pos` is in LRS.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DifferentialPair {
    pub pos: DeviceModel,
    pub neg: DeviceModel,
}

impl DifferentialPair {
    pub fn new(template: &DeviceModel, value: Binary) -> Result<Self> {
        template.validate()?;
        let (p, n) = match value {
            Binary::High => (ResistiveState::Lrs, ResistiveState::Hrs),
            Binary::Low => (ResistiveState::Hrs, ResistiveState::Lrs),
        };
        Ok(Self { pos: template.with_state(p), neg: template.with_state(n) })
    }

    pub fn value(&self) -> Binary {
        Binary::from_bool(self.pos.state == ResistiveState::Lrs)
    }

    pub fn is_complementary(&self) -> bool {
        self.pos.state != self.neg.state
    }
}

const TMO_CAP_PER_UM2: f64 = 1e-14;

/// Electrical presets for the device technologies considered for integration.
pub fn device_presets() -> Vec<DeviceModel> {
    let named = |name: &str, d: DeviceModel| DeviceModel { preset_name: Some(name.into()), ..d };
    alloc::vec![
        named(
            "tmo-interface",
            DeviceModel {
                r_on: 0.7e6,
                r_off: 290e6,
                cap: TMO_CAP_PER_UM2 * 20.0,
                state: ResistiveState::Hrs,
                terminals: Terminals::Two,
                v_set: 2.5,
                v_reset: -1.5,
                area: 20.0,
                preset_name: None,
            },
        ),
        named(
            "tmo-filamentary",
            DeviceModel {
                r_on: 0.8e6,
                r_off: 80e6,
                cap: TMO_CAP_PER_UM2 * 20.0,
                state: ResistiveState::Hrs,
                terminals: Terminals::Two,
                v_set: -1.5,
                v_reset: 2.5,
                area: 20.0,
                preset_name: None,
            },
        ),
        named(
            "ferroelectric-hafnia",
            DeviceModel {
                r_on: 10e9,
                r_off: 100e9,
                cap: 100e-15,
                state: ResistiveState::Hrs,
                terminals: Terminals::Two,
                v_set: 2.0,
                v_reset: -2.0,
                area: 10.0,
                preset_name: None,
            },
        ),
        named(
            "ferroelectric-fefet",
            DeviceModel {
                r_on: 10e9,
                r_off: 100e9,
                cap: 100e-15,
                state: ResistiveState::Hrs,
                terminals: Terminals::Three,
                v_set: 4.0,
                v_reset: -4.0,
                area: 10.0,
                preset_name: None,
            },
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dev() -> DeviceModel {
        DeviceModel::new(1e9, 10e9, 100e-15).unwrap().with_state(ResistiveState::Lrs)
    }

    #[test]
    fn current_without_capacitance_is_ohmic() {
        let d = DeviceModel { cap: 0.0, ..dev() };
        for t in [0.0, 1e-6, 1.0] {
            assert_eq!(device_current(&d, 0.5, t).unwrap(), (0.5e-9, 0.0));
        }
    }

    #[test]
    fn capacitive_current_at_one_time_constant() {
        let (i_res, i_cap) = device_current(&dev(), 0.5, 100e-6).unwrap();
        assert!((i_res - 0.5e-9).abs() < 1e-21);
        assert!((i_cap - 0.5e-9 * (-1.0f64).exp()).abs() < 1e-18);
        assert!((i_cap - 0.184e-9).abs() < 0.001e-9);
        let (_, late) = device_current(&dev(), 0.5, 1.0).unwrap();
        assert!(late < 1e-30);
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(DeviceModel::new(1e9, 1e9, 0.0).is_err());
        assert!(DeviceModel::new(1e9, 2e9, -1.0).is_err());
        let hot = DeviceModel { v_set: 6.0, ..dev() };
        assert!(matches!(hot.validate(), Err(Error::VoltageOutOfRange { .. })));
        assert_eq!(dev().resistance(), 1e9);
        assert_eq!(dev().with_state(ResistiveState::Hrs).resistance(), 10e9);
    }

    #[test]
    fn presets_are_valid() {
        let presets = device_presets();
        for p in &presets {
            p.validate().unwrap();
        }
        let fe = presets.iter().find(|p| p.preset_name.as_deref() == Some("ferroelectric-hafnia")).unwrap();
        assert_eq!((fe.r_on, fe.ratio(), fe.v_set), (10e9, 10.0, 2.0));
        let tmo = presets.iter().find(|p| p.preset_name.as_deref() == Some("tmo-interface")).unwrap();
        assert!((tmo.cap / tmo.area - 1e-14).abs() < 1e-28);
    }

    #[test]
    fn pair_is_complementary() {
        let hi = DifferentialPair::new(&dev(), Binary::High).unwrap();
        assert!(hi.is_complementary());
        assert_eq!(hi.value(), Binary::High);
        assert_eq!(hi.pos.state, ResistiveState::Lrs);
        let lo = DifferentialPair::new(&dev(), Binary::Low).unwrap();
        assert_eq!(lo.value(), Binary::Low);
    }
}
