//! Versioned JSON model files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::LrModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MODEL_FORMAT: &str = "polarity-lr";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct ModelFile<T> {
    format: String,
    version: u32,
    #[serde(flatten)]
    model: LrModel<T>,
}

pub fn model_to_json<T: Scalar>(model: &LrModel<T>) -> Result<String> {
    let file = ModelFile {
        format: MODEL_FORMAT.to_owned(),
        version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).map_err(|e| Error::Corrupt(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn model_from_json<T: Scalar>(text: &str) -> Result<LrModel<T>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Corrupt(e.to_string()))?;
    if value.get("format").and_then(|f| f.as_str()) != Some(MODEL_FORMAT) {
        return Err(Error::Corrupt(format!("not a {MODEL_FORMAT} model file")));
    }
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Corrupt("missing format version".into()))?;
    if version != u64::from(MODEL_FORMAT_VERSION) {
        return Err(Error::Version {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: MODEL_FORMAT_VERSION,
        });
    }
    // re-parse from the text: going through Value would lose float round-tripping
    let file: ModelFile<T> = serde_json::from_str(text).map_err(|e| Error::Corrupt(e.to_string()))?;
    file.model.check_shapes().map_err(|e| Error::Corrupt(e.to_string()))?;
    file.model
        .train_config
        .validate()
        .map_err(|e| Error::Corrupt(e.to_string()))?;
    Ok(file.model)
}

pub fn save_model<T: Scalar>(model: &LrModel<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<LrModel<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
