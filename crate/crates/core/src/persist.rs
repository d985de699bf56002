//! On-disk model and trace formats.
//!
//! A model file is one JSON document: the method tag, the canonical scaler
//! fitted on the training split, reproducibility provenance (dataset name,
//! split, training config), the method-specific payload, and measured
//! training time under a dedicated `timing` key so reproducibility checks
//! can ignore it.

use crate::data_pipeline::{MinMaxScaler, SplitSpec};
use crate::deeponet::PDeepONetModel;
use crate::error::{Error, Result};
use crate::evaluation::{MethodTag, MlpSurrogate, Surrogate, TimeBreakdown};
use crate::neural_net::{MlpModel, TrainConfig, TrainTrace};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const MODEL_SCHEMA: &str = "ilmodel/1";

/// Everything needed to reproduce a training run from the dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dataset: String,
    pub split: SplitSpec,
    pub train_config: TrainConfig,
}

/// Serialized trained model with its scaler and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema: String,
    pub method: MethodTag,
    pub scaler: MinMaxScaler,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mlp: Option<MlpModel>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pdeeponet: Option<PDeepONetModel>,
    /// Measured training wall time. Excluded from determinism comparisons.
    pub timing: TimeBreakdown,
}

impl ModelFile {
    pub fn new_mlp(
        method: MethodTag,
        model: MlpModel,
        scaler: MinMaxScaler,
        provenance: Provenance,
        timing: TimeBreakdown,
    ) -> Self {
        ModelFile {
            schema: MODEL_SCHEMA.to_string(),
            method,
            scaler,
            provenance,
            mlp: Some(model),
            pdeeponet: None,
            timing,
        }
    }

    pub fn new_pdeeponet(
        model: PDeepONetModel,
        scaler: MinMaxScaler,
        provenance: Provenance,
        timing: TimeBreakdown,
    ) -> Self {
        ModelFile {
            schema: MODEL_SCHEMA.to_string(),
            method: MethodTag::Pdeeponet,
            scaler,
            provenance,
            mlp: None,
            pdeeponet: Some(model),
            timing,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self).expect("model serializes");
        json.push('\n');
        std::fs::write(path, json).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::ModelFormat {
            path: path.to_path_buf(),
            detail: format!("not a model file: {e}"),
        })?;
        if file.schema != MODEL_SCHEMA {
            return Err(Error::ModelFormat {
                path: path.to_path_buf(),
                detail: format!("unsupported schema `{}`", file.schema),
            });
        }
        let consistent = match file.method {
            MethodTag::Nn | MethodTag::Pdnn => file.mlp.is_some() && file.pdeeponet.is_none(),
            MethodTag::Pdeeponet => file.pdeeponet.is_some() && file.mlp.is_none(),
        };
        if !consistent {
            return Err(Error::ModelFormat {
                path: path.to_path_buf(),
                detail: format!("payload does not match method `{}`", file.method),
            });
        }
        if let Some(mlp) = &file.mlp {
            mlp.validate()?;
        }
        Ok(file)
    }

    /// Instantiate the prediction interface for this model.
    pub fn surrogate(&self) -> Box<dyn Surrogate> {
        match self.method {
            MethodTag::Nn | MethodTag::Pdnn => Box::new(MlpSurrogate {
                model: self.mlp.clone().expect("validated on load"),
                scaler: self.scaler.clone(),
                method: self.method,
            }),
            MethodTag::Pdeeponet => Box::new(self.pdeeponet.clone().expect("validated on load")),
        }
    }
}

/// Write a per-epoch training trace: loss components and epoch wall time.
pub fn save_trace_csv(trace: &TrainTrace, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    writeln!(w, "epoch,total_loss,mse,penalty,seconds").map_err(io_err)?;
    for e in &trace.epochs {
        writeln!(
            w,
            "{},{},{},{},{}",
            e.epoch, e.total_loss, e.mse, e.penalty, e.seconds
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
