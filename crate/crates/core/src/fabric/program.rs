use alloc::vec::Vec;

use super::dac::{dac_current, DacChannel};
use super::mismatch;
use super::registers::RegisterFile;
use super::sadc::SadcConfig;
use super::topology::{check, ChipConfig, NeuronAddr, CORES, MAX_MONITORS, PLASTIC_PER_NEURON, REGISTERS_PER_CORE};
use crate::error::{positive, Error, Result};
use crate::memdevice::{DeviceModel, ReadConfig, Timing, WriteConfig};
use crate::neuron::NeuronParams;
use crate::plasticity::PlasticityParams;
use crate::Binary;

/// Synaptic DPI settings of a neuron block.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SynapseConfig {
    /// Current jump per spike on a static excitatory synapse (A).
    pub static_exc_weight: f64,
    /// Current jump per spike on a static inhibitory synapse (A), subtracted.
    pub static_inh_weight: f64,
    /// Current jump per spike on a plastic synapse holding a high weight (A).
    pub plastic_weight: f64,
    pub tau_exc: f64,
    pub tau_inh: f64,
}

impl Default for SynapseConfig {
    fn default() -> Self {
        Self { static_exc_weight: 0.3e-9, static_inh_weight: 0.3e-9, plastic_weight: 0.3e-9, tau_exc: 5e-3, tau_inh: 10e-3 }
    }
}

/// Device interface used by every plastic synapse when enabled.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct DeviceConfig {
    pub template: DeviceModel,
    #[cfg_attr(feature = "serde", serde(default))]
    pub read: ReadConfig,
    #[cfg_attr(feature = "serde", serde(default))]
    pub write: WriteConfig,
    #[cfg_attr(feature = "serde", serde(default))]
    pub timing: Timing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum MonitorSignal {
    IMem,
    IAhp,
    ISynExc,
    ISynInh,
    PostTrace,
    Calcium,
    PreTrace { synapse: u8 },
    Weight { synapse: u8 },
}

impl MonitorSignal {
    pub fn name(&self) -> &'static str {
        match self {
            MonitorSignal::IMem => "i_mem",
            MonitorSignal::IAhp => "i_ahp",
            MonitorSignal::ISynExc => "i_syn_exc",
            MonitorSignal::ISynInh => "i_syn_inh",
            MonitorSignal::PostTrace => "i_post",
            MonitorSignal::Calcium => "ca",
            MonitorSignal::PreTrace { .. } => "i_pre",
            MonitorSignal::Weight { .. } => "v_w",
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            MonitorSignal::Weight { .. } => "v",
            _ => "a",
        }
    }

    /// Whether the sADC can convert the signal (currents only).
    pub fn is_current(&self) -> bool {
        self.unit() == "a"
    }
}

/// A monitored signal of one neuron block. Its channel is its position in
/// [`NetworkProgram::monitors`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Monitor {
    pub core: u8,
    pub neuron: u8,
    pub signal: MonitorSignal,
    /// Convert to sADC spikes in the event log.
    #[cfg_attr(feature = "serde", serde(default))]
    pub sadc: Option<SadcConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BiasParam {
    IDc,
    IThresh,
    ExpKnee,
    AhpJump,
    PreJump,
    PostJump,
    StaticExcWeight,
    StaticInhWeight,
    PlasticWeight,
}

/// Drives a named per-core parameter from a DAC channel whose 12-bit code
/// sits in a configuration register.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct DacBinding {
    pub core: u8,
    pub register: u8,
    pub param: BiasParam,
    pub channel: DacChannel,
}

/// Everything the chip needs besides its input spikes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct NetworkProgram {
    pub neuron: NeuronParams,
    /// Per-neuron DC input overriding `neuron.i_dc`, flat-indexed.
    pub i_dc: Option<Vec<f64>>,
    pub synapses: SynapseConfig,
    pub plasticity: PlasticityParams,
    pub learning: bool,
    pub devices: Option<DeviceConfig>,
    /// Initial binary weights, `neurons × 54`; all low when absent.
    pub weights: Option<Vec<Vec<Binary>>>,
    pub monitors: Vec<Monitor>,
    pub sample_dt_ns: u64,
    pub dac: Vec<DacBinding>,
}

impl Default for NetworkProgram {
    fn default() -> Self {
        Self {
            neuron: NeuronParams::default(),
            i_dc: None,
            synapses: SynapseConfig::default(),
            plasticity: PlasticityParams::default(),
            learning: true,
            devices: None,
            weights: None,
            monitors: Vec::new(),
            sample_dt_ns: 100_000,
            dac: Vec::new(),
        }
    }
}

/// Per-core parameter set after DAC bindings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CoreParams {
    pub neuron: NeuronParams,
    pub synapses: SynapseConfig,
    pub plasticity: PlasticityParams,
}

impl NetworkProgram {
    pub fn validate(&self, config: &ChipConfig) -> Result<()> {
        config.validate()?;
        self.neuron.validate()?;
        self.plasticity.validate()?;
        let s = &self.synapses;
        positive("tau_exc", s.tau_exc)?;
        positive("tau_inh", s.tau_inh)?;
        for (name, w) in [
            ("static_exc_weight", s.static_exc_weight),
            ("static_inh_weight", s.static_inh_weight),
            ("plastic_weight", s.plastic_weight),
        ] {
            crate::error::non_negative(name, w)?;
        }
        if let Some(dc) = &self.i_dc {
            if dc.len() != config.neurons() {
                return Err(Error::ShapeMismatch { expected: (config.neurons(), 1), found: (dc.len(), 1) });
            }
            for &v in dc {
                crate::error::finite("i_dc", v)?;
            }
        }
        if let Some(w) = &self.weights {
            check_shape(w, config)?;
        }
        if let Some(d) = &self.devices {
            d.template.validate()?;
            d.read.validate()?;
            d.write.validate()?;
            d.timing.validate()?;
        }
        if self.monitors.len() > MAX_MONITORS {
            return Err(Error::AddressOutOfRange {
                field: "monitor",
                value: self.monitors.len() as u64 - 1,
                max: MAX_MONITORS as u64 - 1,
            });
        }
        for m in &self.monitors {
            NeuronAddr::new(m.core as usize, m.neuron as usize)?;
            if let MonitorSignal::PreTrace { synapse } | MonitorSignal::Weight { synapse } = m.signal {
                check("synapse", synapse as usize, PLASTIC_PER_NEURON)?;
            }
            if let Some(c) = m.sadc {
                c.validate()?;
                if !m.signal.is_current() {
                    return Err(Error::InvalidParameter { name: "sadc", value: 0.0 });
                }
            }
        }
        if self.sample_dt_ns == 0 {
            return Err(Error::InvalidParameter { name: "sample_dt_ns", value: 0.0 });
        }
        for b in &self.dac {
            check("core", b.core as usize, CORES)?;
            check("register", b.register as usize, REGISTERS_PER_CORE)?;
            b.channel.validate()?;
        }
        for core in 0..CORES {
            let p = self.core_params(core)?;
            p.neuron.validate()?;
            p.plasticity.validate()?;
        }
        Ok(())
    }

    pub(crate) fn core_params(&self, core: usize) -> Result<CoreParams> {
        let mut p = CoreParams { neuron: self.neuron, synapses: self.synapses, plasticity: self.plasticity };
        for b in self.dac.iter().filter(|b| b.core as usize == core) {
            let i = dac_current(&b.channel)?.abs();
            match b.param {
                BiasParam::IDc => p.neuron.i_dc = i,
                BiasParam::IThresh => p.neuron.i_thresh = i,
                BiasParam::ExpKnee => p.neuron.exp_knee = i,
                BiasParam::AhpJump => p.neuron.ahp_jump = i,
                BiasParam::PreJump => p.plasticity.pre_jump = i,
                BiasParam::PostJump => p.plasticity.post_jump = i,
                BiasParam::StaticExcWeight => p.synapses.static_exc_weight = i,
                BiasParam::StaticInhWeight => p.synapses.static_inh_weight = i,
                BiasParam::PlasticWeight => p.synapses.plastic_weight = i,
            }
        }
        Ok(p)
    }

    /// Soma parameters of one neuron: core biases, DC override, then mismatch.
    pub fn neuron_params(&self, config: &ChipConfig, addr: NeuronAddr) -> Result<NeuronParams> {
        let mut p = self.core_params(addr.core as usize)?.neuron;
        if let Some(dc) = &self.i_dc {
            p.i_dc = dc[addr.flat()];
        }
        Ok(mismatch::apply(&p, addr, config.seed, config.mismatch_sigma))
    }

    /// Register contents implied by the DAC bindings.
    pub fn initial_registers(&self) -> Result<RegisterFile> {
        let mut regs = RegisterFile::default();
        for b in &self.dac {
            regs.write(b.core as usize, b.register as usize, b.channel.code()? as u32)?;
        }
        Ok(regs)
    }

    pub fn initial_weight(&self, addr: NeuronAddr, synapse: usize) -> Binary {
        self.weights.as_ref().map_or(Binary::Low, |w| w[addr.flat()][synapse])
    }
}

fn check_shape(matrix: &[Vec<Binary>], config: &ChipConfig) -> Result<()> {
    let rows = config.neurons();
    let cols = config.plastic_per_neuron;
    let found_cols = matrix.iter().map(Vec::len).find(|&c| c != cols).unwrap_or(cols);
    if matrix.len() != rows || found_cols != cols {
        return Err(Error::ShapeMismatch { expected: (rows, cols), found: (matrix.len(), found_cols) });
    }
    Ok(())
}

/// Stores a `neurons × 54` binary weight matrix into the program.
pub fn program_weight_matrix(program: &mut NetworkProgram, config: &ChipConfig, matrix: &[Vec<Binary>]) -> Result<()> {
    check_shape(matrix, config)?;
    program.weights = Some(matrix.to_vec());
    Ok(())
}

/// All-`value` weight matrix of the right shape.
pub fn uniform_weights(config: &ChipConfig, value: Binary) -> Vec<Vec<Binary>> {
    alloc::vec![alloc::vec![value; config.plastic_per_neuron]; config.neurons()]
}
