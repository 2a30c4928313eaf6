use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_dataset, generate_synthetic, mix, split, CorpusError, DatasetRecord, Provenance, SplitManifest, SynthConfig, DATASET_SCHEMA};
use crate::antipattern::{inject_with, AntiPatternId};
use crate::embed::{mean_pool, project, random_walks, lexical_corpus, train_skipgram, EmbeddingTable, TrainConfig, WalkCorpus};
use crate::model::{Ontology, OntologyStatus};
use crate::modularize::modularize;
use crate::tableau::classify_status;
use crate::translate::{to_triples, Label, DEFAULT_TOKEN_BUDGET};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedSettings {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub walks_per_node: usize,
    pub depth: usize,
}

impl Default for EmbedSettings {
    fn default() -> Self {
        EmbedSettings { dim: 100, window: 5, epochs: 10, negatives: 5, walks_per_node: 10, depth: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// The only source of randomness; the synthetic generator's own seed is
    /// replaced by it.
    pub seed: u64,
    pub synth: SynthConfig,
    /// Classes per module the head count aims for.
    pub module_classes: usize,
    pub min_module_classes: usize,
    pub budget: usize,
    /// Pattern names to inject; empty means all fourteen.
    pub patterns: Vec<String>,
    pub max_missing: usize,
    pub ratios: [u32; 3],
    pub stratified: bool,
    pub embed: Option<EmbedSettings>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            synth: SynthConfig::default(),
            module_classes: 20,
            min_module_classes: 5,
            budget: DEFAULT_TOKEN_BUDGET,
            patterns: vec![],
            max_missing: 2,
            ratios: [70, 15, 15],
            stratified: true,
            embed: None,
        }
    }
}

impl PipelineConfig {
    pub fn pattern_ids(&self) -> Result<Vec<AntiPatternId>, CorpusError> {
        if self.patterns.is_empty() {
            return Ok(AntiPatternId::ALL.to_vec());
        }
        self.patterns.iter().map(|p| p.parse().map_err(|e: crate::antipattern::UnknownPattern| CorpusError::Config(e.to_string()))).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub sources: usize,
    pub modules: usize,
    pub consistent_modules: usize,
    /// Modules the tableau did not find consistent and coherent; always 0
    /// for the synthetic generator.
    pub rejected_modules: usize,
    pub dropped_axioms: usize,
    pub one_injection: BTreeMap<String, usize>,
    pub two_injections: BTreeMap<String, usize>,
    pub excluded_by_budget: usize,
    pub census: BTreeMap<String, usize>,
    pub quotas: BTreeMap<String, usize>,
    pub records: usize,
    pub consistent_records: usize,
    pub inconsistent_records: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOutput {
    pub modules: Vec<Ontology>,
    pub records: Vec<DatasetRecord>,
    pub manifest: SplitManifest,
    pub report: PipelineReport,
    pub embeddings: Option<EmbeddingTable>,
}

fn record(o: Ontology, source_module: &str, pattern: Option<AntiPatternId>, injected: usize, status: Option<OntologyStatus>) -> DatasetRecord {
    let mut doc = to_triples(&o);
    let label = if pattern.is_some() { Label::Inconsistent } else { Label::Consistent };
    doc.label = Some(label);
    doc.pattern = pattern;
    DatasetRecord {
        id: o.id.clone(),
        source_module: source_module.to_string(),
        ontology: o,
        doc,
        embedding: None,
        label,
        pattern,
        injected_axioms: injected,
        semantic_status: status,
    }
}

fn record_corpus(o: &Ontology, s: &EmbedSettings, seed: u64) -> WalkCorpus {
    let mut g = project(o);
    g.close_subclass();
    let mut c = random_walks(&g, s.depth, s.walks_per_node, mix(seed, &o.id));
    c.extend(lexical_corpus(o));
    c
}

/// Generate, modularize, inject, translate, balance, label and split.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput, CorpusError> {
    let synth = SynthConfig { seed: cfg.seed, ..cfg.synth.clone() };
    run_pipeline_on(&generate_synthetic(&synth)?, cfg)
}

/// The pipeline from modularization on, over caller-supplied sources.
pub fn run_pipeline_on(sources: &[Ontology], cfg: &PipelineConfig) -> Result<PipelineOutput, CorpusError> {
    cfg.pattern_ids()?;
    let mut report = PipelineReport { sources: sources.len(), ..Default::default() };

    let parts: Vec<(Vec<Ontology>, usize)> = sources
        .par_iter()
        .map(|o| {
            let n = o.classes().len();
            let k = n.div_ceil(cfg.module_classes.max(1)).clamp(1, n.max(1));
            let m = modularize(o, Some(k))?;
            let kept = m.modules.into_iter().map(|r| r.module).filter(|m| m.classes().len() >= cfg.min_module_classes).collect();
            Ok((kept, m.dropped.len()))
        })
        .collect::<Result<_, CorpusError>>()?;
    let mut modules = Vec::new();
    for (m, d) in parts {
        modules.extend(m);
        report.dropped_axioms += d;
    }
    report.modules = modules.len();
    finish(modules, report, cfg)
}

/// Treats every input as a module: check, inject, balance, label and split.
pub fn dataset_from_modules(modules: Vec<Ontology>, cfg: &PipelineConfig) -> Result<PipelineOutput, CorpusError> {
    let report = PipelineReport { modules: modules.len(), ..Default::default() };
    finish(modules, report, cfg)
}

fn finish(modules: Vec<Ontology>, mut report: PipelineReport, cfg: &PipelineConfig) -> Result<PipelineOutput, CorpusError> {
    let patterns = cfg.pattern_ids()?;
    let statuses: Vec<OntologyStatus> = modules.par_iter().map(classify_status).collect::<Result<_, _>>()?;
    let consistent_modules: Vec<Ontology> = modules
        .iter()
        .zip(&statuses)
        .filter(|(_, s)| s.is_consistent_coherent())
        .map(|(m, _)| m.clone())
        .collect();
    report.consistent_modules = consistent_modules.len();
    report.rejected_modules = modules.len() - consistent_modules.len();

    let injected: Vec<Vec<(Ontology, AntiPatternId, usize)>> = consistent_modules
        .par_iter()
        .map(|m| {
            patterns
                .iter()
                .filter_map(|&id| {
                    let (mut o, rep) = inject_with(m, id, mix(cfg.seed, &format!("{}/{}", m.id, id)), cfg.max_missing).ok()?;
                    o.id = format!("{}__{}", m.id, id.name());
                    Some((o, id, rep.injected_axioms.len()))
                })
                .collect()
        })
        .collect();

    let consistent: Vec<DatasetRecord> = consistent_modules
        .iter()
        .map(|m| record(m.clone(), &m.id, None, 0, Some(OntologyStatus::ConsistentCoherent)))
        .collect();
    let mut inconsistent = Vec::new();
    for (m, list) in consistent_modules.iter().zip(injected) {
        for (o, id, n) in list {
            let tier = if n == 1 { &mut report.one_injection } else { &mut report.two_injections };
            *tier.entry(id.name().to_string()).or_default() += 1;
            inconsistent.push(record(o, &m.id, Some(id), n, None));
        }
    }

    let built = build_dataset(consistent, inconsistent, cfg.budget, mix(cfg.seed, "balance"));
    report.excluded_by_budget = built.excluded_by_budget;
    report.census = built.census.iter().map(|(p, c)| (p.name().to_string(), *c)).collect();
    report.quotas = built.quotas.iter().map(|(p, c)| (p.name().to_string(), *c)).collect();
    let mut records = built.records;
    let fresh: Vec<Option<OntologyStatus>> = records
        .par_iter()
        .map(|r| match &r.semantic_status {
            Some(s) => Ok(Some(s.clone())),
            None => classify_status(&r.ontology).map(Some),
        })
        .collect::<Result<_, _>>()?;
    for (r, s) in records.iter_mut().zip(fresh) {
        r.semantic_status = s;
    }

    let embeddings = match &cfg.embed {
        None => None,
        Some(s) => {
            let corpora: Vec<WalkCorpus> = records.par_iter().map(|r| record_corpus(&r.ontology, s, cfg.seed)).collect();
            let mut all = WalkCorpus::default();
            for c in &corpora {
                all.sentences.extend(c.sentences.iter().cloned());
            }
            let tc = TrainConfig {
                dim: s.dim,
                window: s.window,
                epochs: s.epochs,
                negatives: s.negatives,
                seed: mix(cfg.seed, "embed"),
                ..TrainConfig::default()
            };
            let (table, _) = train_skipgram(&all, &tc)?;
            for (r, c) in records.iter_mut().zip(&corpora) {
                let tokens: Vec<&String> = c.tokens().collect();
                r.embedding = Some(mean_pool(&tokens, &table)?.vector);
            }
            Some(table)
        }
    };

    let manifest = split(&records, cfg.ratios, mix(cfg.seed, "split"), cfg.stratified)?;
    report.records = records.len();
    report.consistent_records = records.iter().filter(|r| r.label == Label::Consistent).count();
    report.inconsistent_records = report.records - report.consistent_records;
    Ok(PipelineOutput { modules: consistent_modules, records, manifest, report, embeddings })
}

fn with_provenance<T: Serialize>(v: &T, p: &Provenance) -> Result<serde_json::Value, CorpusError> {
    let mut v = serde_json::to_value(v)?;
    if let serde_json::Value::Object(m) = &mut v {
        m.insert("provenance".into(), serde_json::to_value(p)?);
    }
    Ok(v)
}

impl PipelineOutput {
    /// Writes `dataset.jsonl`, `split.json`, `report.json` and, when trained,
    /// `embeddings.bin` with its `embeddings.meta.json`.
    pub fn write(&self, dir: &Path, provenance: &Provenance) -> Result<(), CorpusError> {
        fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(fs::File::create(dir.join("dataset.jsonl"))?);
        let header = serde_json::json!({ "schema": DATASET_SCHEMA, "provenance": provenance, "records": self.records.len() });
        serde_json::to_writer(&mut w, &header)?;
        writeln!(w)?;
        for r in &self.records {
            serde_json::to_writer(&mut w, &r.to_line())?;
            writeln!(w)?;
        }
        w.flush()?;
        fs::write(dir.join("split.json"), serde_json::to_string_pretty(&with_provenance(&self.manifest, provenance)?)?)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(&with_provenance(&self.report, provenance)?)?)?;
        if let Some(t) = &self.embeddings {
            let mut w = BufWriter::new(fs::File::create(dir.join("embeddings.bin"))?);
            t.write_binary(&mut w)?;
            w.flush()?;
            let meta = serde_json::json!({ "schema": "ontocheck.embeddings/1", "dim": t.dim(), "vocab_size": t.len(), "provenance": provenance });
            fs::write(dir.join("embeddings.meta.json"), serde_json::to_string_pretty(&meta)?)?;
        }
        Ok(())
    }
}
