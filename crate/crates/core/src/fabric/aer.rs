//! Address-event packets.
//!
//! Wire layout, 12 bytes little-endian:
//! `u64 timestamp_ns | u8 kind | u8 core | u8 neuron | u8 synapse_or_reg`.

use super::topology::{check, CORES, MAX_MONITORS, NEURONS_PER_CORE, REGISTERS_PER_CORE, SYNAPSES_PER_NEURON};
use crate::error::{Error, Result};

pub const PACKET_BYTES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EventKind {
    InputSpike,
    OutputSpike,
    RegisterWrite,
    RegisterRead,
    MonitorSpike,
}

impl EventKind {
    pub fn code(self) -> u8 {
        match self {
            EventKind::InputSpike => 0,
            EventKind::OutputSpike => 1,
            EventKind::RegisterWrite => 2,
            EventKind::RegisterRead => 3,
            EventKind::MonitorSpike => 4,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => EventKind::InputSpike,
            1 => EventKind::OutputSpike,
            2 => EventKind::RegisterWrite,
            3 => EventKind::RegisterRead,
            4 => EventKind::MonitorSpike,
            _ => return Err(Error::Decode { field: "kind", value: code as u64 }),
        })
    }
}

/// A timestamped address event.
///
/// `index` is the synapse for input spikes, the register for register
/// accesses and the monitor channel for monitor spikes; it is 0 for output
/// spikes. Register writes carry their value in `value`, which has no place
/// in the binary packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct AerEvent {
    pub t_ns: u64,
    pub kind: EventKind,
    pub core: u8,
    #[cfg_attr(feature = "serde", serde(default))]
    pub neuron: u8,
    #[cfg_attr(feature = "serde", serde(default))]
    pub index: u8,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub value: Option<u32>,
}

impl AerEvent {
    pub fn input(t_ns: u64, core: u8, neuron: u8, synapse: u8) -> Self {
        Self { t_ns, kind: EventKind::InputSpike, core, neuron, index: synapse, value: None }
    }

    pub fn time(&self) -> f64 {
        self.t_ns as f64 * 1e-9
    }

    /// Checks every field against the chip topology.
    pub fn validate(&self) -> Result<()> {
        check("core", self.core as usize, CORES)?;
        match self.kind {
            EventKind::InputSpike => {
                check("neuron", self.neuron as usize, NEURONS_PER_CORE)?;
                check("synapse", self.index as usize, SYNAPSES_PER_NEURON)?;
            }
            EventKind::OutputSpike => {
                check("neuron", self.neuron as usize, NEURONS_PER_CORE)?;
                check("index", self.index as usize, 1)?;
            }
            EventKind::RegisterWrite | EventKind::RegisterRead => {
                check("register", self.index as usize, REGISTERS_PER_CORE)?;
                if let Some(v) = self.value {
                    super::registers::check_value(v)?;
                }
            }
            EventKind::MonitorSpike => check("monitor", self.index as usize, MAX_MONITORS)?,
        }
        Ok(())
    }
}

/// Encodes an event without payload.
pub fn encode_event(ev: &AerEvent) -> Result<[u8; PACKET_BYTES]> {
    ev.validate()?;
    if ev.value.is_some() {
        return Err(Error::InvalidParameter { name: "value", value: ev.value.unwrap_or(0) as f64 });
    }
    let mut out = [0u8; PACKET_BYTES];
    out[..8].copy_from_slice(&ev.t_ns.to_le_bytes());
    out[8] = ev.kind.code();
    out[9] = ev.core;
    out[10] = ev.neuron;
    out[11] = ev.index;
    Ok(out)
}

pub fn encode_spike(core: u8, neuron: u8, t_ns: u64) -> Result<[u8; PACKET_BYTES]> {
    encode_event(&AerEvent { t_ns, kind: EventKind::OutputSpike, core, neuron, index: 0, value: None })
}

pub fn decode_event(packet: &[u8]) -> Result<AerEvent> {
    if packet.len() != PACKET_BYTES {
        return Err(Error::Decode { field: "length", value: packet.len() as u64 });
    }
    let mut ts = [0u8; 8];
    ts.copy_from_slice(&packet[..8]);
    let ev = AerEvent {
        t_ns: u64::from_le_bytes(ts),
        kind: EventKind::from_code(packet[8])?,
        core: packet[9],
        neuron: packet[10],
        index: packet[11],
        value: None,
    };
    ev.validate().map_err(|e| match e {
        Error::AddressOutOfRange { field, value, .. } => Error::Decode { field, value },
        other => other,
    })?;
    Ok(ev)
}

/// Index of the first event earlier than its predecessor, if any.
pub fn first_unsorted(events: &[AerEvent]) -> Option<usize> {
    events.windows(2).position(|w| w[1].t_ns < w[0].t_ns).map(|k| k + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_every_synapse_address() {
        let mut n = 0;
        for core in 0..CORES as u8 {
            for neuron in 0..NEURONS_PER_CORE as u8 {
                for syn in 0..SYNAPSES_PER_NEURON as u8 {
                    let ev = AerEvent::input(n as u64 * 7919, core, neuron, syn);
                    assert_eq!(decode_event(&encode_event(&ev).unwrap()).unwrap(), ev);
                    n += 1;
                }
            }
        }
        assert_eq!(n, 10_440);
    }

    #[test]
    fn out_of_range_fields_name_themselves() {
        let bad = AerEvent::input(0, 0, 0, 58);
        assert!(matches!(encode_event(&bad), Err(Error::AddressOutOfRange { field: "synapse", .. })));
        let mut pkt = encode_event(&AerEvent::input(5, 1, 89, 57)).unwrap();
        pkt[11] = 58;
        assert_eq!(decode_event(&pkt), Err(Error::Decode { field: "synapse", value: 58 }));
        pkt[8] = 9;
        assert_eq!(decode_event(&pkt), Err(Error::Decode { field: "kind", value: 9 }));
        assert!(decode_event(&pkt[..11]).is_err());
    }

    #[test]
    fn spike_packets_round_trip() {
        let p = encode_spike(1, 42, u64::MAX).unwrap();
        let ev = decode_event(&p).unwrap();
        assert_eq!((ev.kind, ev.core, ev.neuron, ev.t_ns), (EventKind::OutputSpike, 1, 42, u64::MAX));
    }

    #[test]
    fn payloads_do_not_fit_the_packet() {
        let ev = AerEvent { t_ns: 0, kind: EventKind::RegisterWrite, core: 0, neuron: 0, index: 3, value: Some(7) };
        ev.validate().unwrap();
        assert!(encode_event(&ev).is_err());
    }
}
