//! Stage-artifact container: a directory holding `manifest.json` plus one
//! raw little-endian float64 file per named array, row-major. Language
//! neutral and bit-exact across runs.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// Shape and dtype of one persisted array.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ArrayMeta {
    pub shape: Vec<usize>,
    pub dtype: String,
}

/// Self-describing header for a container directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub kind: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub arrays: BTreeMap<String, ArrayMeta>,
    pub extra: BTreeMap<String, Value>,
}

impl Manifest {
    pub fn new(kind: &str, command: &str, seed: u64, config_hash: &str) -> Self {
        Manifest {
            schema: SCHEMA_VERSION,
            kind: kind.to_string(),
            command: command.to_string(),
            seed,
            config_hash: config_hash.to_string(),
            arrays: BTreeMap::new(),
            extra: BTreeMap::new(),
        }
    }

    /// Value of a required `extra` field, or the incompatibility error that
    /// names it.
    pub fn require(&self, field: &str) -> Result<&Value> {
        self.extra.get(field).ok_or_else(|| {
            Error::Incompatible(format!("manifest field `{field}` missing in {}", self.kind))
        })
    }

    pub fn require_u64(&self, field: &str) -> Result<u64> {
        self.require(field)?.as_u64().ok_or_else(|| {
            Error::Incompatible(format!("manifest field `{field}` is not an integer"))
        })
    }

    pub fn require_f64(&self, field: &str) -> Result<f64> {
        self.require(field)?.as_f64().ok_or_else(|| {
            Error::Incompatible(format!("manifest field `{field}` is not a number"))
        })
    }

    pub fn require_str(&self, field: &str) -> Result<&str> {
        self.require(field)?.as_str().ok_or_else(|| {
            Error::Incompatible(format!("manifest field `{field}` is not a string"))
        })
    }
}

/// A named f64 array with its row-major shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Array {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Array {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} wants {len} values, got {}",
                data.len()
            )));
        }
        Ok(Array { shape, data })
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Array::new(vec![rows, cols], data)
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Array {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let cols = *self.shape.last().unwrap_or(&0);
        &self.data[r * cols..(r + 1) * cols]
    }
}

/// Write manifest plus arrays; array metadata in the manifest is rebuilt
/// from the arrays passed here.
pub fn save(dir: &Path, manifest: &Manifest, arrays: &BTreeMap<String, Array>) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut manifest = manifest.clone();
    manifest.arrays = arrays
        .iter()
        .map(|(name, a)| {
            (
                name.clone(),
                ArrayMeta {
                    shape: a.shape.clone(),
                    dtype: "f64".into(),
                },
            )
        })
        .collect();
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(dir.join("manifest.json"), text)?;
    for (name, a) in arrays {
        let mut bytes = Vec::with_capacity(a.data.len() * 8);
        for v in &a.data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(dir.join(format!("{name}.f64")), bytes)?;
    }
    Ok(())
}

pub fn load_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    if manifest.schema != SCHEMA_VERSION {
        return Err(Error::Incompatible(format!(
            "manifest field `schema` is {}, expected {SCHEMA_VERSION}",
            manifest.schema
        )));
    }
    Ok(manifest)
}

/// Read the manifest and every array it declares.
pub fn load(dir: &Path) -> Result<(Manifest, BTreeMap<String, Array>)> {
    let manifest = load_manifest(dir)?;
    let mut arrays = BTreeMap::new();
    for (name, meta) in &manifest.arrays {
        if meta.dtype != "f64" {
            return Err(Error::Incompatible(format!(
                "array `{name}` has dtype {}, expected f64",
                meta.dtype
            )));
        }
        let bytes = fs::read(dir.join(format!("{name}.f64")))?;
        let want: usize = meta.shape.iter().product();
        if bytes.len() != want * 8 {
            return Err(Error::Incompatible(format!(
                "array `{name}` has {} bytes, shape {:?} wants {}",
                bytes.len(),
                meta.shape,
                want * 8
            )));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        arrays.insert(name.clone(), Array::new(meta.shape.clone(), data)?);
    }
    Ok((manifest, arrays))
}

/// The named array, or the incompatibility error naming it.
pub fn take(arrays: &mut BTreeMap<String, Array>, name: &str) -> Result<Array> {
    arrays
        .remove(name)
        .ok_or_else(|| Error::Incompatible(format!("manifest field `arrays.{name}` missing")))
}
