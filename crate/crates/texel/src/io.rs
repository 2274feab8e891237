//! File formats: AER streams (JSON lines and 12-byte binary packets), run
//! logs, monitor traces and small CSV tables.
//!
//! CSV output is RFC 4180 with `\n` records, `.` decimals and the shortest
//! round-trip float representation, so equal values always give equal bytes.

use std::fs;
use std::path::Path;

use serde::Serialize;
use texel_core::fabric::{decode_event, encode_event, AerEvent, LogEvent, Trace, PACKET_BYTES};
use texel_core::Binary;

use crate::error::{io_err, Error, Result};

/// Column formatting for CSV cells.
pub trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        if *self == 0.0 {
            // Never emit "-0".
            "0".into()
        } else {
            format!("{self:e}")
        }
    }
}

macro_rules! display_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn cell(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
display_cell!(u8, u16, u32, u64, usize, i64, bool, &str, String, Binary);

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => {
        vec![$($crate::io::Cell::cell(&$x)),*]
    };
}

pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Config(e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

pub fn jsonl_bytes<T: Serialize>(items: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for it in items {
        serde_json::to_writer(&mut out, it)?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(io_err(path))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, bytes).map_err(io_err(path))
}

/// Parses AER events, one JSON object per line. Blank lines and `#` comments are skipped.
pub fn parse_aer_jsonl(text: &str, path: &Path) -> Result<Vec<AerEvent>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ev: AerEvent =
            serde_json::from_str(line).map_err(|e| Error::Parse { path: path.into(), line: k + 1, message: e.to_string() })?;
        out.push(ev);
    }
    Ok(out)
}

pub fn parse_aer_binary(bytes: &[u8], path: &Path) -> Result<Vec<AerEvent>> {
    if !bytes.len().is_multiple_of(PACKET_BYTES) {
        return Err(Error::Parse {
            path: path.into(),
            line: bytes.len() / PACKET_BYTES + 1,
            message: format!("truncated packet: {} trailing bytes", bytes.len() % PACKET_BYTES),
        });
    }
    bytes
        .chunks_exact(PACKET_BYTES)
        .enumerate()
        .map(|(k, p)| decode_event(p).map_err(|e| Error::Parse { path: path.into(), line: k + 1, message: e.to_string() }))
        .collect()
}

pub fn aer_binary_bytes(events: &[AerEvent]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(events.len() * PACKET_BYTES);
    for ev in events {
        out.extend_from_slice(&encode_event(ev)?);
    }
    Ok(out)
}

/// Reads an AER file; `.aer` and `.bin` are binary, anything else JSON lines.
pub fn read_aer(path: &Path) -> Result<Vec<AerEvent>> {
    let bytes = read_file(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("aer" | "bin") => parse_aer_binary(&bytes, path),
        _ => {
            let text =
                String::from_utf8(bytes).map_err(|e| Error::Parse { path: path.into(), line: 0, message: e.to_string() })?;
            parse_aer_jsonl(&text, path)
        }
    }
}

pub fn log_jsonl_bytes(log: &[LogEvent]) -> Result<Vec<u8>> {
    jsonl_bytes(log)
}

/// `t_ns,<signal>_<unit>` CSV for one monitor trace.
pub fn trace_csv(trace: &Trace) -> Result<Vec<u8>> {
    let sig = trace.monitor.signal;
    let col = format!("{}_{}", sig.name(), sig.unit());
    csv_bytes(&["t_ns", &col], trace.samples.iter().map(|&(t, v)| row![t, v]))
}

/// File name of a monitor trace.
pub fn trace_file_name(trace: &Trace) -> String {
    let m = &trace.monitor;
    format!("trace_{:02}_c{}n{}_{}.csv", trace.channel, m.core, m.neuron, m.signal.name())
}

pub fn weights_csv(matrix: &[Vec<Binary>]) -> Result<Vec<u8>> {
    let rows = matrix.iter().enumerate().flat_map(|(n, r)| r.iter().enumerate().map(move |(s, w)| row![n, s, w.is_high() as u8]));
    csv_bytes(&["neuron_id", "synapse", "weight"], rows)
}

/// Parses a `neuron_id,synapse,weight` table into a `neurons × synapses` matrix.
pub fn parse_weights_csv(bytes: &[u8], path: &Path, neurons: usize, synapses: usize) -> Result<Vec<Vec<Binary>>> {
    let mut m = vec![vec![Binary::Low; synapses]; neurons];
    let mut r = csv::Reader::from_reader(bytes);
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |message: String| Error::Parse { path: path.into(), line: k + 2, message };
        let field = |i: usize| -> Result<usize> {
            rec.get(i).ok_or_else(|| bad(format!("missing column {i}")))?.trim().parse().map_err(|e| bad(format!("{e}")))
        };
        let (n, s, w) = (field(0)?, field(1)?, field(2)?);
        if n >= neurons || s >= synapses || w > 1 {
            return Err(bad(format!("entry ({n}, {s}, {w}) out of range")));
        }
        m[n][s] = Binary::from_bool(w == 1);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use texel_core::fabric::EventKind;

    #[test]
    fn aer_round_trips_in_both_forms() {
        let evs = vec![AerEvent::input(5, 0, 3, 57), AerEvent::input(9, 1, 89, 0)];
        let bin = aer_binary_bytes(&evs).unwrap();
        assert_eq!(bin.len(), 24);
        assert_eq!(parse_aer_binary(&bin, Path::new("x.aer")).unwrap(), evs);
        let text = String::from_utf8(jsonl_bytes(&evs).unwrap()).unwrap();
        assert_eq!(parse_aer_jsonl(&text, Path::new("x.jsonl")).unwrap(), evs);
        assert!(parse_aer_binary(&bin[..23], Path::new("x.aer")).is_err());
    }

    #[test]
    fn register_values_only_travel_as_json() {
        let w = AerEvent { t_ns: 1, kind: EventKind::RegisterWrite, core: 0, neuron: 0, index: 2, value: Some(7) };
        assert!(aer_binary_bytes(&[w]).is_err());
        let text = String::from_utf8(jsonl_bytes(&[w]).unwrap()).unwrap();
        assert_eq!(parse_aer_jsonl(&text, Path::new("r.jsonl")).unwrap(), vec![w]);
    }

    #[test]
    fn malformed_json_reports_line() {
        let e = parse_aer_jsonl("# header\n{\"t_ns\":1}\n", Path::new("bad.jsonl")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn float_cells_are_stable() {
        assert_eq!((-0.0f64).cell(), "0");
        assert_eq!(1.5e-12f64.cell(), "1.5e-12");
        assert_eq!(0.1f64.cell().parse::<f64>().unwrap(), 0.1);
        let bytes = csv_bytes(&["a_s", "b"], [row![1.0, "x,y"]]).unwrap();
        assert_eq!(bytes, b"a_s,b\n1e0,\"x,y\"\n");
    }

    #[test]
    fn weights_round_trip() {
        let m = vec![vec![Binary::High, Binary::Low], vec![Binary::Low, Binary::High]];
        let bytes = weights_csv(&m).unwrap();
        assert_eq!(parse_weights_csv(&bytes, Path::new("w.csv"), 2, 2).unwrap(), m);
        assert!(parse_weights_csv(b"neuron_id,synapse,weight\n2,0,1\n", Path::new("w.csv"), 2, 2).is_err());
    }
}
