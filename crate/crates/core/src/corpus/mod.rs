//! Synthetic corpora, balanced datasets, splits, metrics and timing.

mod dataset;
mod pipeline;
mod synth;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::Ontology;

pub use dataset::{
    balance_quotas, build_dataset, evaluate, evaluate_lines, largest_remainder, leave_family_out, read_dataset_lines, read_predictions,
    split, split_sizes, write_predictions, BuiltDataset, DatasetLine, DatasetRecord, Metrics, PatternRecall, Prediction,
    Split, SplitManifest, DATASET_SCHEMA, METRICS_SCHEMA, OVER_REPRESENTED, PREDICTIONS_SCHEMA, SPLIT_SCHEMA,
};
pub use pipeline::{dataset_from_modules, run_pipeline, run_pipeline_on, EmbedSettings, PipelineConfig, PipelineOutput, PipelineReport};
pub use synth::{generate_one, generate_synthetic, SynthConfig};

pub const TIMING_SCHEMA: &str = "ontocheck.timing/1";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("ontology {index} was not consistent and coherent after {attempts} attempts")]
    GenerationBudgetExceeded { index: usize, attempts: usize },
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("no prediction for record {0}")]
    MissingPrediction(String),
    #[error("unexpected schema {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Tableau(#[from] crate::tableau::TableauError),
    #[error(transparent)]
    Modularize(#[from] crate::modularize::ModularizeError),
    #[error(transparent)]
    Embed(#[from] crate::embed::EmbedError),
}

/// Stable seed derivation from a global seed and a record key.
pub fn mix(seed: u64, key: &str) -> u64 {
    // FNV-1a, then the SplitMix finalizer
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    crate::embed::mix_seed(seed, h)
}

/// Stamped into every emitted artifact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    pub fn new<C: Serialize>(seed: u64, config: &C) -> Self {
        Provenance { tool_version: env!("CARGO_PKG_VERSION").to_string(), seed, config_hash: config_hash(config) }
    }
}

/// First 16 hex digits of the SHA-256 of the config's JSON form.
pub fn config_hash<C: Serialize>(config: &C) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))[..16].to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordTiming {
    pub id: String,
    pub ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckerTiming {
    pub checker: String,
    pub records: Vec<RecordTiming>,
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub schema: String,
    pub checkers: Vec<CheckerTiming>,
}

impl TimingReport {
    pub fn new(checkers: Vec<CheckerTiming>) -> Self {
        TimingReport { schema: TIMING_SCHEMA.into(), checkers }
    }
}

/// Wall time of `checker` on each ontology, run one after another.
pub fn time_harness<T>(name: &str, checker: impl Fn(&Ontology) -> T, records: &[&Ontology]) -> CheckerTiming {
    let mut out = Vec::with_capacity(records.len());
    let mut total = 0.0;
    for o in records {
        let t = Instant::now();
        std::hint::black_box(checker(o));
        let ms = t.elapsed().as_secs_f64() * 1e3;
        total += ms;
        out.push(RecordTiming { id: o.id.clone(), ms });
    }
    CheckerTiming { checker: name.to_string(), records: out, total_ms: total }
}
