//! JSON experiment configuration: a flat `ModelConfig` object, the classifier
//! under a `classifier` key, and optional run settings.
//!
//! ```json
//! { "p": 0.01, "f": 0.144, "alpha": 0.5,
//!   "classifier": { "theta": 0.3 },
//!   "rings": 2, "tau": 1, "trials": 100000, "seed": 42 }
//! ```
//!
//! Missing keys fall back to [`ModelConfig::calibrated`] and the default
//! classifier. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::decode::ClassifierWeights;
use crate::error::{Error, Result};
use crate::error_model::ModelConfig;

const CLASSIFIER_KEY: &str = "classifier";

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rings: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

const RUN_KEYS: [&str; 4] = ["rings", "tau", "trials", "seed"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub classifier: ClassifierWeights,
    pub run: RunSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::calibrated(),
            classifier: ClassifierWeights::default(),
            run: RunSettings::default(),
        }
    }
}

fn overlay<T: Serialize + for<'de> Deserialize<'de>>(base: &T, patch: Map<String, Value>) -> Result<T> {
    let Value::Object(mut merged) = serde_json::to_value(base)? else {
        unreachable!("struct serializes to an object")
    };
    merged.extend(patch);
    Ok(serde_json::from_value(Value::Object(merged))?)
}

impl ExperimentConfig {
    pub fn from_value(value: Value) -> Result<Self> {
        let Value::Object(mut obj) = value else {
            return Err(Error::Validation("configuration must be a JSON object".into()));
        };
        let classifier = match obj.remove(CLASSIFIER_KEY) {
            None => ClassifierWeights::default(),
            Some(Value::Object(patch)) => overlay(&ClassifierWeights::default(), patch)?,
            Some(_) => return Err(Error::Validation("`classifier` must be an object".into())),
        };
        let run_patch: Map<String, Value> = RUN_KEYS
            .iter()
            .filter_map(|&k| obj.remove(k).map(|v| (k.to_string(), v)))
            .collect();
        let run: RunSettings = serde_json::from_value(Value::Object(run_patch))?;
        let model = overlay(&ModelConfig::calibrated(), obj)?;
        model.validate()?;
        classifier.validate()?;
        Ok(Self { model, classifier, run })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_value(&self) -> Value {
        let mut obj = match serde_json::to_value(self.model).expect("model serializes") {
            Value::Object(m) => m,
            _ => unreachable!(),
        };
        obj.insert(
            CLASSIFIER_KEY.into(),
            serde_json::to_value(self.classifier).expect("weights serialize"),
        );
        if let Value::Object(run) = serde_json::to_value(self.run).expect("run settings serialize") {
            obj.extend(run);
        }
        Value::Object(obj)
    }
}
