//! On-disk formats: checksummed radial-profile caches and raw field dumps.
//!
//! A profile cache is a CSV file whose first line is
//! `# r_max=<f64> n=<usize> tail=<json> checksum=<sha256 hex>` followed by
//! `r,value` rows. The checksum covers the bytes of the rows.
//! A field dump is a little-endian `f64` array (x fastest) next to a JSON
//! sidecar describing the box.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{Field3D, FieldGeometry};
use crate::radial::{RadialGrid, RadialProfile, Tail};

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn profile_rows(p: &RadialProfile) -> String {
    let mut body = String::with_capacity(p.values().len() * 40);
    body.push_str("r,value\n");
    for (r, v) in p.grid().nodes().zip(p.values()) {
        // `{:?}` prints the shortest representation that round-trips.
        body.push_str(&format!("{r:?},{v:?}\n"));
    }
    body
}

/// Serializes a profile to the cache format.
pub fn profile_to_string(p: &RadialProfile) -> Result<String> {
    let body = profile_rows(p);
    let tail = serde_json::to_string(&p.tail())?;
    Ok(format!(
        "# r_max={:?} n={} tail={} checksum={}\n{}",
        p.r_max(),
        p.grid().n_points(),
        tail,
        sha256_hex(body.as_bytes()),
        body
    ))
}

fn header_field<'a>(header: &'a str, key: &str) -> Result<&'a str> {
    header
        .split(' ')
        .find_map(|kv| kv.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
        .ok_or_else(|| Error::Parse(format!("cache header lacks `{key}`")))
}

/// Parses the cache format, verifying the checksum and the grid.
pub fn profile_from_str(text: &str) -> Result<RadialProfile> {
    let (header, body) = text
        .split_once('\n')
        .ok_or_else(|| Error::Parse("empty profile cache".into()))?;
    let header = header
        .strip_prefix("# ")
        .ok_or_else(|| Error::Parse("cache header must start with `# `".into()))?;
    let expected = header_field(header, "checksum")?.to_string();
    let found = sha256_hex(body.as_bytes());
    if expected != found {
        return Err(Error::Checksum { expected, found });
    }
    let r_max: f64 = header_field(header, "r_max")?
        .parse()
        .map_err(|e| Error::Parse(format!("r_max: {e}")))?;
    let n: usize = header_field(header, "n")?
        .parse()
        .map_err(|e| Error::Parse(format!("n: {e}")))?;
    let tail: Tail = serde_json::from_str(header_field(header, "tail")?)?;
    let grid = RadialGrid::new(r_max, n)?;
    let mut values = Vec::with_capacity(grid.len());
    for (i, line) in body.lines().skip(1).enumerate() {
        let (r, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("row {i}: expected `r,value`")))?;
        let r: f64 = r.parse().map_err(|e| Error::Parse(format!("row {i}: {e}")))?;
        if (r - grid.node(i)).abs() > 1e-9 * r_max {
            return Err(Error::Parse(format!("row {i}: node {r} does not match the grid")));
        }
        values.push(v.parse().map_err(|e| Error::Parse(format!("row {i}: {e}")))?);
    }
    RadialProfile::new(grid, values, tail)
}

/// Writes a profile cache file, creating parent directories.
pub fn save_profile(path: &Path, p: &RadialProfile) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, profile_to_string(p)?)?;
    Ok(())
}

pub fn load_profile(path: &Path) -> Result<RadialProfile> {
    profile_from_str(&fs::read_to_string(path)?)
}

/// JSON sidecar of a binary field dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub n: usize,
    pub half_width: f64,
    pub center: [f64; 3],
    /// Always `"x-fastest"`.
    pub order: String,
    /// Always `"f64-le"`.
    pub dtype: String,
    pub checksum: String,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes `field` to `path` and its sidecar to `path.json`.
pub fn save_field(path: &Path, field: &Field3D) -> Result<FieldSidecar> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut bytes = Vec::with_capacity(field.data().len() * 8);
    for v in field.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let g = field.geometry();
    let sidecar = FieldSidecar {
        n: g.n,
        half_width: g.half_width,
        center: g.center,
        order: "x-fastest".into(),
        dtype: "f64-le".into(),
        checksum: sha256_hex(&bytes),
    };
    fs::File::create(path)?.write_all(&bytes)?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(sidecar)
}

/// Reads a dump written by [`save_field`], verifying size and checksum.
pub fn load_field(path: &Path) -> Result<Field3D> {
    let sidecar: FieldSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    if sidecar.order != "x-fastest" || sidecar.dtype != "f64-le" {
        return Err(Error::Parse(format!("unsupported layout {}/{}", sidecar.order, sidecar.dtype)));
    }
    let bytes = fs::read(path)?;
    let found = sha256_hex(&bytes);
    if found != sidecar.checksum {
        return Err(Error::Checksum { expected: sidecar.checksum, found });
    }
    if bytes.len() != sidecar.n.pow(3) * 8 {
        return Err(Error::Parse(format!("dump holds {} bytes, expected {}", bytes.len(), sidecar.n.pow(3) * 8)));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Field3D::from_data(
        FieldGeometry { n: sidecar.n, half_width: sidecar.half_width, center: sidecar.center },
        data,
    )
}
