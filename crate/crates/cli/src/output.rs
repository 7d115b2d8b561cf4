//! Human-readable formatting, provenance, and output files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// `x` rounded to six significant digits, without trailing noise.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..=9).contains(&magnitude) {
        let decimals = (5 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

/// Provenance line shared by every output of one invocation: command,
/// version and a hash of the fully resolved parameters.
pub fn provenance(command: &str, resolved: &Value) -> String {
    let digest = Sha256::digest(format!("{command}\n{resolved}").as_bytes());
    let hex: String = digest.iter().take(6).map(|b| format!("{b:02x}")).collect();
    format!("pulsedose {command} v{} args={hex}", env!("CARGO_PKG_VERSION"))
}

/// Output directory of an invocation, created on first use.
pub struct OutDir(Option<PathBuf>);

impl OutDir {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
        }
        Ok(OutDir(dir))
    }

    /// Opens `name` inside the directory, or `None` when no directory was
    /// requested.
    pub fn create(&self, name: &str) -> Result<Option<(PathBuf, BufWriter<File>)>, CliError> {
        let Some(dir) = &self.0 else { return Ok(None) };
        let path = dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(Some((path, BufWriter::new(file))))
    }

    /// Writes a JSON document with a `provenance` field.
    pub fn json<T: Serialize>(&self, name: &str, doc: &T, prov: &str) -> Result<(), CliError> {
        if let Some((path, mut w)) = self.create(name)? {
            let text = serde_json::to_string_pretty(&with_provenance(doc, prov)?).map_err(CliError::json)?;
            writeln!(w, "{text}")
                .and_then(|_| w.flush())
                .map_err(|e| CliError::io(&path, e))?;
        }
        Ok(())
    }
}

/// `doc` as a JSON object carrying the provenance string.
pub fn with_provenance<T: Serialize>(doc: &T, prov: &str) -> Result<Value, CliError> {
    let mut v = serde_json::to_value(doc).map_err(CliError::json)?;
    if let Value::Object(map) = &mut v {
        map.insert("provenance".into(), Value::String(prov.into()));
    }
    Ok(v)
}

pub fn display_path(p: &Path) -> String {
    p.display().to_string()
}
