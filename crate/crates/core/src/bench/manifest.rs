//! Manifest file: a header line, one line per entry, and a footer carrying
//! the SHA-256 of everything before it.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BenchmarkManifest, ManifestEntry};
use crate::error::{Error, Result};
use crate::rng::hex_digest;

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    sampling_seed: u64,
    entries: usize,
}

#[derive(Serialize, Deserialize)]
struct Footer {
    checksum: String,
}

/// Serialized manifest bytes; the checksum is the footer's value.
pub fn manifest_bytes(m: &BenchmarkManifest) -> (Vec<u8>, String) {
    let mut body = Vec::new();
    let header = Header { version: m.version, sampling_seed: m.sampling_seed, entries: m.entries.len() };
    serde_json::to_writer(&mut body, &header).expect("header serializes");
    body.push(b'\n');
    for e in &m.entries {
        serde_json::to_writer(&mut body, e).expect("entry serializes");
        body.push(b'\n');
    }
    let checksum = hex_digest(&body);
    serde_json::to_writer(&mut body, &Footer { checksum: checksum.clone() }).expect("footer serializes");
    body.push(b'\n');
    (body, checksum)
}

/// Writes atomically and returns the checksum.
pub fn write_manifest(path: &Path, m: &BenchmarkManifest) -> Result<String> {
    let (bytes, checksum) = manifest_bytes(m);
    let tmp = path.with_extension("jsonl.tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(checksum)
}

pub fn read_manifest(path: &Path) -> Result<BenchmarkManifest> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let parse_err = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    let lines: Vec<String> = file.lines().collect::<std::io::Result<_>>()?;
    if lines.len() < 2 {
        return Err(parse_err(lines.len(), "manifest needs a header and a footer".into()));
    }
    let footer: Footer =
        serde_json::from_str(&lines[lines.len() - 1]).map_err(|e| parse_err(lines.len(), e.to_string()))?;
    let mut body = Vec::new();
    for l in &lines[..lines.len() - 1] {
        body.extend_from_slice(l.as_bytes());
        body.push(b'\n');
    }
    let computed = hex_digest(&body);
    if computed != footer.checksum {
        return Err(Error::Checksum { expected: footer.checksum, computed });
    }
    let header: Header = serde_json::from_str(&lines[0]).map_err(|e| parse_err(1, e.to_string()))?;
    let mut entries = Vec::with_capacity(header.entries);
    for (i, l) in lines[1..lines.len() - 1].iter().enumerate() {
        let e: ManifestEntry = serde_json::from_str(l).map_err(|e| parse_err(i + 2, e.to_string()))?;
        entries.push(e);
    }
    if entries.len() != header.entries {
        return Err(parse_err(1, format!("header promises {} entries, found {}", header.entries, entries.len())));
    }
    Ok(BenchmarkManifest { version: header.version, sampling_seed: header.sampling_seed, entries })
}
