//! JSONL syndrome record format.
//!
//! Line 1 is a header object. Every following line holds one shot:
//!
//! ```text
//! {"format_version":1,"platform":"sim","distance_or_rings":2,"shots":2,"rounds":1,"detectors":3,"metadata":{}}
//! {"shot":0,"rounds":["05"]}
//! {"shot":1,"rounds":["00"]}
//! ```
//!
//! Each round is the detector bitstring packed little-endian (bit 0 of byte 0
//! is detector 0) and written as `2 * ceil(detectors / 8)` lowercase hex digits.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::SyndromeDataset;
use crate::error::{arg, Error, Result};
use crate::error_model::SyndromeWindow;
use crate::lattice::HexCell;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetHeader {
    pub format_version: u32,
    pub platform: String,
    pub distance_or_rings: u32,
    pub shots: usize,
    pub rounds: usize,
    pub detectors: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<Vec<(usize, usize)>>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShotLine {
    shot: usize,
    rounds: Vec<String>,
}

pub fn packed_len(detectors: usize) -> usize {
    detectors.div_ceil(8)
}

pub fn pack_round(bits: &[bool]) -> String {
    let mut bytes = vec![0u8; packed_len(bits.len())];
    for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
        bytes[i / 8] |= 1 << (i % 8);
    }
    hex::encode(bytes)
}

/// Decodes one round string into `out`, rejecting set padding bits.
pub fn unpack_round(s: &str, out: &mut [bool]) -> std::result::Result<(), String> {
    let n = out.len();
    if s.len() != 2 * packed_len(n) {
        return Err(format!("round string has {} hex digits, expected {}", s.len(), 2 * packed_len(n)));
    }
    let bytes = hex::decode(s).map_err(|e| format!("invalid hex: {e}"))?;
    for (i, o) in out.iter_mut().enumerate() {
        *o = bytes[i / 8] >> (i % 8) & 1 == 1;
    }
    if (n..bytes.len() * 8).any(|i| bytes[i / 8] >> (i % 8) & 1 == 1) {
        return Err("padding bits beyond the last detector are set".into());
    }
    Ok(())
}

impl DatasetHeader {
    pub fn of(ds: &SyndromeDataset) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            platform: ds.platform.clone(),
            distance_or_rings: ds.distance_or_rings,
            shots: ds.shots,
            rounds: ds.rounds,
            detectors: ds.detectors,
            adjacency: ds.adjacency.clone(),
            metadata: ds.metadata.clone(),
        }
    }
}

pub fn write_to<W: Write>(ds: &SyndromeDataset, mut w: W) -> Result<()> {
    ds.validate()?;
    serde_json::to_writer(&mut w, &DatasetHeader::of(ds))?;
    writeln!(w)?;
    for shot in 0..ds.shots {
        let rounds = (0..ds.rounds).map(|r| pack_round(ds.round_bits(shot, r))).collect();
        serde_json::to_writer(&mut w, &ShotLine { shot, rounds })?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset(ds: &SyndromeDataset, path: impl AsRef<Path>) -> Result<()> {
    write_to(ds, BufWriter::new(File::create(path)?))
}

fn parse_err(line: usize, msg: impl ToString) -> Error {
    Error::Parse {
        line,
        msg: msg.to_string(),
    }
}

pub fn read_from<R: BufRead>(r: R) -> Result<SyndromeDataset> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header: DatasetHeader = match lines.next() {
        Some((n, l)) => serde_json::from_str(&l?).map_err(|e| parse_err(n, e))?,
        None => return Err(parse_err(1, "missing header")),
    };
    if header.format_version != FORMAT_VERSION {
        return Err(Error::Validation(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            header.format_version
        )));
    }

    let mut ds = SyndromeDataset {
        platform: header.platform,
        distance_or_rings: header.distance_or_rings,
        shots: header.shots,
        rounds: header.rounds,
        detectors: header.detectors,
        bits: vec![false; header.shots * header.rounds * header.detectors],
        adjacency: header.adjacency,
        metadata: header.metadata,
    };
    ds.validate()?;

    let mut seen = 0usize;
    for (n, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ShotLine = serde_json::from_str(&line).map_err(|e| parse_err(n, e))?;
        if seen == ds.shots {
            return Err(Error::Validation(format!(
                "line {n}: more shot lines than the {} declared",
                ds.shots
            )));
        }
        if rec.shot != seen {
            return Err(Error::Validation(format!("line {n}: expected shot {seen}, found {}", rec.shot)));
        }
        if rec.rounds.len() != ds.rounds {
            return Err(Error::Validation(format!(
                "line {n}: {} rounds, header declares {}",
                rec.rounds.len(),
                ds.rounds
            )));
        }
        for (r, s) in rec.rounds.iter().enumerate() {
            let start = ds.index(seen, r, 0);
            let det = ds.detectors;
            unpack_round(s, &mut ds.bits[start..start + det])
                .map_err(|m| Error::Validation(format!("line {n}, round {r}: {m}")))?;
        }
        seen += 1;
    }
    if seen != ds.shots {
        return Err(Error::Validation(format!(
            "found {seen} shot lines, header declares {}",
            ds.shots
        )));
    }
    Ok(ds)
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<SyndromeDataset> {
    read_from(BufReader::new(File::open(path)?))
}

/// One shot per window; detectors are the cell's nodes and rounds its tau.
pub fn from_simulation(cell: &HexCell, windows: &[SyndromeWindow], meta: BTreeMap<String, String>) -> Result<SyndromeDataset> {
    let Some(first) = windows.first() else {
        return arg("at least one window is required");
    };
    let tau = first.tau;
    if let Some(w) = windows.iter().find(|w| w.tau != tau) {
        return arg(format!("inconsistent tau across windows ({tau} vs {})", w.tau));
    }
    if let Some(w) = windows.iter().find(|w| w.nodes() != cell.len()) {
        return arg(format!("window has {} nodes, cell has {}", w.nodes(), cell.len()));
    }
    let mut ds = SyndromeDataset::zeros("simulation", windows.len(), tau, cell.len());
    ds.distance_or_rings = cell.rings as u32;
    ds.adjacency = Some(cell.edges());
    ds.metadata = meta;
    for (shot, w) in windows.iter().enumerate() {
        for node in 0..cell.len() {
            for round in 0..tau {
                ds.set(shot, round, node, w.bit(node, round));
            }
        }
    }
    Ok(ds)
}
