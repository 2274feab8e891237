//! The two-core chip: topology, AER interface, configuration, monitors and
//! the event-driven scheduler.

pub mod aer;
pub mod dac;
pub mod mismatch;
pub mod program;
pub mod registers;
pub mod sadc;
pub mod sim;
pub mod topology;

pub use aer::{decode_event, encode_event, encode_spike, AerEvent, EventKind, PACKET_BYTES};
pub use dac::{dac_current, DacChannel, Polarity, FINE_LEVELS, MASTER_CURRENTS};
pub use program::{
    program_weight_matrix, uniform_weights, BiasParam, DacBinding, DeviceConfig, Monitor, MonitorSignal, NetworkProgram,
    SynapseConfig,
};
pub use registers::RegisterFile;
pub use sadc::{sadc_events, sadc_rate, sadc_reconstruct, SadcConfig};
pub use sim::{read_weight_matrix, run, run_with, serial_blocks, BlockOutput, Chip, LogEvent, LogKind, RunOutput, Trace};
pub use topology::{synapse_kind, ChipConfig, NeuronAddr, SynapseKind};
