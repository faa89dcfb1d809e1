//! Feature archive: `"SFG1" | u32 n_frames | u32 n_filters | f32 values`,
//! all little-endian and row-major by frame, plus a JSON sidecar at
//! `<path>.json` holding [`FeatureMeta`].

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use super::{FeatureError, FeatureMatrix, FeatureMeta};

pub const MAGIC: &[u8; 4] = b"SFG1";
const HEADER_LEN: usize = 12;

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = OsString::from(path.as_os_str());
    s.push(".json");
    PathBuf::from(s)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FeatureError + '_ {
    move |source| FeatureError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn encode(features: &FeatureMatrix) -> Result<Vec<u8>, FeatureError> {
    let dim = |n: usize, what: &str| {
        u32::try_from(n)
            .map_err(|_| FeatureError::DimensionMismatch(format!("{what} {n} exceeds u32")))
    };
    if features.values.len() != features.n_frames * features.n_filters {
        return Err(FeatureError::DimensionMismatch(format!(
            "{} values for {}x{}",
            features.values.len(),
            features.n_frames,
            features.n_filters
        )));
    }
    let mut buf = Vec::with_capacity(HEADER_LEN + 4 * features.values.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&dim(features.n_frames, "n_frames")?.to_le_bytes());
    buf.extend_from_slice(&dim(features.n_filters, "n_filters")?.to_le_bytes());
    for v in &features.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    Ok(buf)
}

pub fn decode(bytes: &[u8], meta: FeatureMeta) -> Result<FeatureMatrix, FeatureError> {
    if bytes.len() < HEADER_LEN {
        return Err(FeatureError::CorruptHeader(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(FeatureError::CorruptHeader("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as usize;
    let (n_frames, n_filters) = (word(4), word(8));
    let expected = n_frames
        .checked_mul(n_filters)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| FeatureError::CorruptHeader("dimensions overflow".into()))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() < expected {
        return Err(FeatureError::CorruptHeader(format!(
            "header declares {n_frames}x{n_filters} but only {} data bytes follow",
            body.len()
        )));
    }
    if body.len() > expected {
        return Err(FeatureError::DimensionMismatch(format!(
            "{} trailing bytes after {n_frames}x{n_filters} values",
            body.len() - expected
        )));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    Ok(FeatureMatrix {
        n_frames,
        n_filters,
        values,
        meta,
    })
}

pub fn write_features(
    features: &FeatureMatrix,
    path: impl AsRef<Path>,
) -> Result<(), FeatureError> {
    let path = path.as_ref();
    fs::write(path, encode(features)?).map_err(io_err(path))?;
    let sidecar = sidecar_path(path);
    let mut json = serde_json::to_vec(&features.meta)?;
    json.push(b'\n');
    fs::write(&sidecar, json).map_err(io_err(&sidecar))
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureMatrix, FeatureError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(io_err(path))?;
    let sidecar = sidecar_path(path);
    let meta = serde_json::from_slice(&fs::read(&sidecar).map_err(io_err(&sidecar))?)?;
    decode(&bytes, meta)
}
