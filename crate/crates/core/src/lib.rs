//! Behavioral, event-driven models of the TEXEL mixed-signal neuromorphic chip.
//!
//! Everything in this crate is a pure state transition over `f64` currents,
//! voltages and times (seconds), except the chip scheduler in [`fabric`], which
//! keeps simulated time as integer nanosecond ticks. The crate is `no_std` and
//! only needs `alloc`; file formats, configuration and the CLI live in the
//! `texel` companion crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style checks reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod dynamics;
pub mod energy;
pub mod error;
pub mod fabric;
pub mod memdevice;
pub mod neuron;
pub mod plasticity;
pub mod rng;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A binary synaptic weight, as stored by the bistable latch or a device pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Binary {
    Low,
    High,
}

impl Binary {
    pub fn is_high(self) -> bool {
        matches!(self, Binary::High)
    }

    pub fn from_bool(high: bool) -> Self {
        if high {
            Binary::High
        } else {
            Binary::Low
        }
    }
}

impl core::fmt::Display for Binary {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Binary::Low => "low",
            Binary::High => "high",
        })
    }
}
