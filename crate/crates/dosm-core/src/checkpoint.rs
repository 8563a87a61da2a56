//! Model checkpoints: versioned JSON files holding trained predictor or
//! critic weights (including optimizer state, so reloading reproduces
//! inference and further training bit-for-bit — JSON f64 serialization in
//! serde is exact round-trip).

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::critic::ValueNet;
use crate::predictor::GruModel;

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

/// Which model family a checkpoint holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Gru,
    Critic,
}

impl std::fmt::Display for Component {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Component::Gru => "gru",
            Component::Critic => "critic",
        })
    }
}

/// One checkpoint file: a full set of per-service models of one family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub component: Component,
    /// Seed the models were trained with (provenance only).
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gru: Option<Vec<GruModel>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critics: Option<Vec<ValueNet>>,
}

impl Checkpoint {
    pub fn for_gru(models: Vec<GruModel>, seed: u64) -> Self {
        Checkpoint {
            schema_version: CHECKPOINT_SCHEMA_VERSION,
            component: Component::Gru,
            seed,
            gru: Some(models),
            critics: None,
        }
    }

    pub fn for_critics(models: Vec<ValueNet>, seed: u64) -> Self {
        Checkpoint {
            schema_version: CHECKPOINT_SCHEMA_VERSION,
            component: Component::Critic,
            seed,
            gru: None,
            critics: Some(models),
        }
    }

    /// Consume the checkpoint, returning the GRU models it must hold.
    pub fn into_gru(self) -> Result<Vec<GruModel>, CheckpointError> {
        match (self.component, self.gru) {
            (Component::Gru, Some(models)) => Ok(models),
            (found, _) => Err(CheckpointError::WrongComponent {
                expected: Component::Gru,
                found,
            }),
        }
    }

    /// Consume the checkpoint, returning the critic models it must hold.
    pub fn into_critics(self) -> Result<Vec<ValueNet>, CheckpointError> {
        match (self.component, self.critics) {
            (Component::Critic, Some(models)) => Ok(models),
            (found, _) => Err(CheckpointError::WrongComponent {
                expected: Component::Critic,
                found,
            }),
        }
    }
}

/// Write a checkpoint as JSON.
pub fn save(path: &Path, checkpoint: &Checkpoint) -> Result<(), CheckpointError> {
    let json = serde_json::to_string(checkpoint)?;
    fs::write(path, json).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Read a checkpoint back, verifying the schema version.
pub fn load(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let text = fs::read_to_string(path).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let ckpt: Checkpoint = serde_json::from_str(&text)?;
    if ckpt.schema_version != CHECKPOINT_SCHEMA_VERSION {
        return Err(CheckpointError::SchemaMismatch {
            found: ckpt.schema_version,
            supported: CHECKPOINT_SCHEMA_VERSION,
        });
    }
    let holds_payload = match ckpt.component {
        Component::Gru => ckpt.gru.is_some(),
        Component::Critic => ckpt.critics.is_some(),
    };
    if !holds_payload {
        return Err(CheckpointError::MissingPayload {
            component: ckpt.component,
        });
    }
    Ok(ckpt)
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint schema version {found} is not supported (expected {supported})")]
    SchemaMismatch { found: u32, supported: u32 },
    #[error("checkpoint holds {found} models, expected {expected}")]
    WrongComponent {
        expected: Component,
        found: Component,
    },
    #[error("checkpoint declares component {component} but carries no such models")]
    MissingPayload { component: Component },
    #[error("checkpoint file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
