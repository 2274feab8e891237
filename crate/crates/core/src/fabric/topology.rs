use crate::error::{Error, Result};

pub const CORES: usize = 2;
pub const NEURONS_PER_CORE: usize = 90;
pub const PLASTIC_PER_NEURON: usize = 54;
pub const STATIC_PER_NEURON: usize = 4;
pub const SYNAPSES_PER_NEURON: usize = PLASTIC_PER_NEURON + STATIC_PER_NEURON;
pub const REGISTERS_PER_CORE: usize = 64;
pub const REGISTER_BITS: u32 = 23;
pub const MAX_MONITORS: usize = 24;

/// Kind of a synapse slot, by index within its neuron block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynapseKind {
    Plastic,
    StaticExc,
    StaticInh,
}

/// Slots `0..54` are plastic, `54..56` static excitatory, `56..58` static inhibitory.
pub fn synapse_kind(index: usize) -> Option<SynapseKind> {
    match index {
        i if i < PLASTIC_PER_NEURON => Some(SynapseKind::Plastic),
        i if i < PLASTIC_PER_NEURON + 2 => Some(SynapseKind::StaticExc),
        i if i < SYNAPSES_PER_NEURON => Some(SynapseKind::StaticInh),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ChipConfig {
    pub cores: usize,
    pub neurons_per_core: usize,
    pub plastic_per_neuron: usize,
    pub static_per_neuron: usize,
    pub registers_per_core: usize,
    /// Log-normal sigma of per-instance bias factors.
    pub mismatch_sigma: f64,
    pub seed: u64,
}

impl Default for ChipConfig {
    fn default() -> Self {
        Self {
            cores: CORES,
            neurons_per_core: NEURONS_PER_CORE,
            plastic_per_neuron: PLASTIC_PER_NEURON,
            static_per_neuron: STATIC_PER_NEURON,
            registers_per_core: REGISTERS_PER_CORE,
            mismatch_sigma: 0.0,
            seed: 0,
        }
    }
}

impl ChipConfig {
    /// The topology is fixed in silicon; only mismatch and seed are free.
    pub fn validate(&self) -> Result<()> {
        let fixed = [
            ("cores", self.cores, CORES),
            ("neurons_per_core", self.neurons_per_core, NEURONS_PER_CORE),
            ("plastic_per_neuron", self.plastic_per_neuron, PLASTIC_PER_NEURON),
            ("static_per_neuron", self.static_per_neuron, STATIC_PER_NEURON),
            ("registers_per_core", self.registers_per_core, REGISTERS_PER_CORE),
        ];
        for (name, got, want) in fixed {
            if got != want {
                return Err(Error::InvalidParameter { name, value: got as f64 });
            }
        }
        if !(self.mismatch_sigma.is_finite() && self.mismatch_sigma >= 0.0) {
            return Err(Error::InvalidParameter { name: "mismatch_sigma", value: self.mismatch_sigma });
        }
        Ok(())
    }

    pub fn neurons(&self) -> usize {
        self.cores * self.neurons_per_core
    }

    pub fn synapses(&self) -> usize {
        self.neurons() * (self.plastic_per_neuron + self.static_per_neuron)
    }

    /// Two devices per plastic synapse.
    pub fn device_slots(&self) -> usize {
        2 * self.neurons() * self.plastic_per_neuron
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NeuronAddr {
    pub core: u8,
    pub neuron: u8,
}

impl NeuronAddr {
    pub fn new(core: usize, neuron: usize) -> Result<Self> {
        check("core", core, CORES)?;
        check("neuron", neuron, NEURONS_PER_CORE)?;
        Ok(Self { core: core as u8, neuron: neuron as u8 })
    }

    /// Flat index `core · 90 + neuron`.
    pub fn flat(self) -> usize {
        self.core as usize * NEURONS_PER_CORE + self.neuron as usize
    }

    pub fn from_flat(i: usize) -> Result<Self> {
        Self::new(i / NEURONS_PER_CORE, i % NEURONS_PER_CORE)
    }
}

pub(crate) fn check(field: &'static str, value: usize, bound: usize) -> Result<()> {
    if value < bound {
        Ok(())
    } else {
        Err(Error::AddressOutOfRange { field, value: value as u64, max: bound as u64 - 1 })
    }
}
