//! Binary state snapshots: little-endian `f64` pairs `(re, im)` and a JSON
//! sidecar describing the layout.

use std::fs;
use std::path::{Path, PathBuf};

use meanfield_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    /// `hartree` for one-particle states, `fock` for many-body states.
    pub kind: String,
    #[serde(rename = "M")]
    pub sites: usize,
    /// Fock cutoff, absent for one-particle states.
    #[serde(rename = "N_max")]
    pub n_max: Option<usize>,
    /// Basis fingerprint, absent for one-particle states.
    pub basis_hash: Option<String>,
    pub time: f64,
    /// Number of complex amplitudes.
    pub len: usize,
}

pub fn encode(amps: &[C64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * amps.len());
    for z in amps {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Option<Vec<C64>> {
    if !bytes.len().is_multiple_of(16) {
        return None;
    }
    let word = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8 bytes"));
    Some(bytes.chunks_exact(16).map(|c| C64::new(word(&c[..8]), word(&c[8..]))).collect())
}

/// Writes `<stem>.bin` and `<stem>.json`; returns the binary path.
pub fn write(dir: &Path, stem: &str, header: &SnapshotHeader, amps: &[C64]) -> CliResult<PathBuf> {
    let bin = dir.join(format!("{stem}.bin"));
    let side = dir.join(format!("{stem}.json"));
    fs::write(&bin, encode(amps)).map_err(|e| CliError::io(format!("writing {}", bin.display()), e))?;
    let json = serde_json::to_string_pretty(header).expect("header serializes");
    fs::write(&side, json + "\n").map_err(|e| CliError::io(format!("writing {}", side.display()), e))?;
    Ok(bin)
}

/// Reads a snapshot given the path of either file.
pub fn read(path: &Path) -> CliResult<(SnapshotHeader, Vec<C64>)> {
    let bin = path.with_extension("bin");
    let side = path.with_extension("json");
    let text = fs::read_to_string(&side).map_err(|e| CliError::io(format!("reading {}", side.display()), e))?;
    let header: SnapshotHeader = serde_json::from_str(&text)
        .map_err(|e| CliError::io(format!("parsing {}", side.display()), std::io::Error::other(e)))?;
    let bytes = fs::read(&bin).map_err(|e| CliError::io(format!("reading {}", bin.display()), e))?;
    let amps = decode(&bytes)
        .filter(|a| a.len() == header.len)
        .ok_or_else(|| CliError::io(format!("reading {}", bin.display()), std::io::Error::other("length does not match header")))?;
    Ok((header, amps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn encoding_is_bit_exact(v in proptest::collection::vec((any::<f64>(), any::<f64>()), 0..40)) {
            let amps: Vec<C64> = v.iter().map(|&(a, b)| C64::new(a, b)).collect();
            let back = decode(&encode(&amps)).unwrap();
            prop_assert_eq!(back.len(), amps.len());
            for (x, y) in back.iter().zip(&amps) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn ragged_input_is_rejected() {
        assert!(decode(&[0u8; 15]).is_none());
        assert_eq!(decode(&[]).unwrap().len(), 0);
    }
}
