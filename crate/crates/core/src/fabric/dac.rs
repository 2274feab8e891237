//! Bias DAC: six master currents, an 8-bit fine divider and a polarity bit.
//!
//! Code layout (12 bits): `fine` in bits 0–7, `master_select` in bits 8–10,
//! polarity in bit 11 (set = sink).

use crate::error::{Error, Result};

pub const MASTER_CURRENTS: [f64; 6] = [2.2e-6, 0.29e-6, 36e-9, 4.5e-9, 0.57e-9, 70e-12];
pub const FINE_LEVELS: f64 = 256.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Polarity {
    #[default]
    Source,
    Sink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct DacChannel {
    pub master_select: u8,
    pub fine: u8,
    #[cfg_attr(feature = "serde", serde(default))]
    pub polarity: Polarity,
}

impl DacChannel {
    pub fn validate(&self) -> Result<()> {
        if self.master_select as usize >= MASTER_CURRENTS.len() {
            return Err(Error::AddressOutOfRange {
                field: "master_select",
                value: self.master_select as u64,
                max: MASTER_CURRENTS.len() as u64 - 1,
            });
        }
        Ok(())
    }

    pub fn code(&self) -> Result<u16> {
        self.validate()?;
        let pol = matches!(self.polarity, Polarity::Sink) as u16;
        Ok(self.fine as u16 | (self.master_select as u16) << 8 | pol << 11)
    }

    pub fn from_code(code: u16) -> Result<Self> {
        if code >> 12 != 0 {
            return Err(Error::Decode { field: "dac code", value: code as u64 });
        }
        let ch = Self {
            fine: (code & 0xff) as u8,
            master_select: ((code >> 8) & 0x7) as u8,
            polarity: if code >> 11 & 1 == 1 { Polarity::Sink } else { Polarity::Source },
        };
        ch.validate().map_err(|_| Error::Decode { field: "master_select", value: ch.master_select as u64 })?;
        Ok(ch)
    }

    /// Closest channel, for a non-negative current, that does not exceed it in magnitude.
    pub fn nearest(current: f64) -> Result<Self> {
        if !(current.is_finite() && current >= 0.0) {
            return Err(Error::InvalidParameter { name: "current", value: current });
        }
        let mut best = Self { master_select: 0, fine: 0, polarity: Polarity::Source };
        let mut err = f64::INFINITY;
        for (m, &master) in MASTER_CURRENTS.iter().enumerate() {
            let fine = libm::floor(current / master * FINE_LEVELS).clamp(0.0, 255.0);
            let e = (current - master * fine / FINE_LEVELS).abs();
            if e < err {
                err = e;
                best = Self { master_select: m as u8, fine: fine as u8, polarity: Polarity::Source };
            }
        }
        Ok(best)
    }
}

/// Output current, negative for sink channels.
pub fn dac_current(channel: &DacChannel) -> Result<f64> {
    channel.validate()?;
    let mag = MASTER_CURRENTS[channel.master_select as usize] * channel.fine as f64 / FINE_LEVELS;
    Ok(match channel.polarity {
        Polarity::Source => mag,
        Polarity::Sink => -mag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors() {
        let top = DacChannel { master_select: 0, fine: 255, polarity: Polarity::Source };
        assert!((dac_current(&top).unwrap() - 2.2e-6 * 255.0 / 256.0).abs() < 1e-18);
        assert_eq!(dac_current(&DacChannel { fine: 0, ..top }).unwrap(), 0.0);
        let floor = dac_current(&DacChannel { master_select: 5, fine: 2, polarity: Polarity::Source }).unwrap();
        assert!((floor - 0.546875e-12).abs() < 1e-20);
        let sink = DacChannel { polarity: Polarity::Sink, ..top };
        assert!(dac_current(&sink).unwrap() < 0.0);
        assert!(dac_current(&DacChannel { master_select: 6, fine: 1, polarity: Polarity::Source }).is_err());
    }

    #[test]
    fn codes_round_trip_and_fine_is_monotone() {
        for m in 0..6u8 {
            let mut last = -1.0;
            for f in 0..=255u8 {
                for polarity in [Polarity::Source, Polarity::Sink] {
                    let ch = DacChannel { master_select: m, fine: f, polarity };
                    assert_eq!(DacChannel::from_code(ch.code().unwrap()).unwrap(), ch);
                }
                let i = dac_current(&DacChannel { master_select: m, fine: f, polarity: Polarity::Source }).unwrap();
                assert!(i >= last);
                assert!(i <= 2.2e-6);
                last = i;
            }
        }
        assert!(DacChannel::from_code(0x700).is_err());
        assert!(DacChannel::from_code(0x1000).is_err());
    }

    #[test]
    fn nearest_channel_is_close() {
        for target in [5e-12, 3.3e-11, 2e-9, 1e-7, 2e-6] {
            let i = dac_current(&DacChannel::nearest(target).unwrap()).unwrap();
            assert!(i <= target && (target - i) / target < 0.02, "{target} -> {i}");
        }
    }
}
