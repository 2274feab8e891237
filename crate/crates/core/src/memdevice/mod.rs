//! Memristive devices, the differential pair that stores one binary weight,
//! the normalizer read path, the read/write controller and the compatibility
//! sweeps.

mod compat;
mod controller;
mod device;
mod read;

pub use compat::{compatibility, compatibility_sweep, min_compatible, point_value, Axis, CompatPoint, Heatmap, SweepParam};
pub use controller::{
    controller_step, run_controller, ControllerMode, ControllerState, ControllerTrace, Pulse, PulseKind, Request, TimedRequest,
    Timing,
};
pub use device::{device_current, device_presets, DeviceModel, DifferentialPair, ResistiveState, Terminals};
pub use read::{
    normalizer, read_weight, write_pair, CapTransient, ReadConfig, ReadMode, ReadResult, WriteConfig, MAX_PULSE_WIDTH,
    MIN_PULSE_WIDTH, PADFRAME_MAX_VOLTAGE,
};
