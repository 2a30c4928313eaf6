use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::antipattern::{AntiPatternId, Family};
use crate::model::{Ontology, OntologyStatus};
use crate::translate::{to_text, Label, TripleDoc};

pub const DATASET_SCHEMA: &str = "ontocheck.dataset/1";
pub const SPLIT_SCHEMA: &str = "ontocheck.split/1";
pub const METRICS_SCHEMA: &str = "ontocheck.metrics/1";
pub const PREDICTIONS_SCHEMA: &str = "ontocheck.predictions/1";

/// Patterns the paper's dataset had in abundance; only these are subsampled
/// when balancing.
pub const OVER_REPRESENTED: [AntiPatternId; 4] =
    [AntiPatternId::EID, AntiPatternId::CSC, AntiPatternId::UE, AntiPatternId::AIO];

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetRecord {
    pub id: String,
    pub source_module: String,
    pub ontology: Ontology,
    pub doc: TripleDoc,
    pub embedding: Option<Vec<f32>>,
    pub label: Label,
    pub pattern: Option<AntiPatternId>,
    pub injected_axioms: usize,
    pub semantic_status: Option<OntologyStatus>,
}

impl DatasetRecord {
    pub fn family(&self) -> Option<Family> {
        self.pattern.map(AntiPatternId::family)
    }

    pub fn to_line(&self) -> DatasetLine {
        let (status, unsat_classes) = match &self.semantic_status {
            None => (None, vec![]),
            Some(s) => {
                let unsat = match s {
                    OntologyStatus::Incoherent(v) => v.iter().map(|n| n.local().to_string()).collect(),
                    _ => vec![],
                };
                (Some(s.label().to_string()), unsat)
            }
        };
        DatasetLine {
            schema: DATASET_SCHEMA.into(),
            id: self.id.clone(),
            source_module: self.source_module.clone(),
            triples: self.doc.triples.iter().map(|t| [t.subject.clone(), t.relation.clone(), t.object.clone()]).collect(),
            text: to_text(&self.doc),
            tokens: self.doc.token_count,
            label: self.label.as_int(),
            pattern: self.pattern.map(|p| p.name().to_string()),
            status,
            unsat_classes,
            injected_axioms: self.injected_axioms,
            embedding: self.embedding.clone(),
        }
    }
}

/// One line of the dataset JSONL.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetLine {
    pub schema: String,
    pub id: String,
    pub source_module: String,
    pub triples: Vec<[String; 3]>,
    pub text: String,
    pub tokens: usize,
    pub label: u8,
    pub pattern: Option<String>,
    pub status: Option<String>,
    pub unsat_classes: Vec<String>,
    pub injected_axioms: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub embedding: Option<Vec<f32>>,
}

pub fn read_dataset_lines(r: impl BufRead) -> Result<Vec<DatasetLine>, CorpusError> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&line)?;
        match v.get("schema").and_then(|s| s.as_str()) {
            Some(DATASET_SCHEMA) if v.get("id").is_some() => out.push(serde_json::from_value(v)?),
            Some(DATASET_SCHEMA) => {} // header line
            other => return Err(CorpusError::SchemaMismatch(other.unwrap_or("none").to_string())),
        }
    }
    Ok(out)
}

/// Splits `total` into parts proportional to `weights` by largest
/// remainder; ties go to the earlier part.
pub fn largest_remainder(total: usize, weights: &[u64]) -> Vec<usize> {
    let sum: u64 = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let t = total as u128;
    let mut parts: Vec<usize> = weights.iter().map(|&w| (t * w as u128 / sum as u128) as usize).collect();
    let mut order: Vec<(u128, usize)> = weights.iter().enumerate().map(|(i, &w)| (t * w as u128 % sum as u128, i)).collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let left = total - parts.iter().sum::<usize>();
    for &(_, i) in order.iter().take(left) {
        parts[i] += 1;
    }
    parts
}

/// Per-pattern counts kept when `census` is cut down to `target` records:
/// rare patterns stay whole, the over-represented four share the rest in
/// proportion to their counts.
pub fn balance_quotas(census: &BTreeMap<AntiPatternId, usize>, target: usize) -> BTreeMap<AntiPatternId, usize> {
    let total: usize = census.values().sum();
    if total <= target {
        return census.clone();
    }
    let rare: usize = census.iter().filter(|(p, _)| !OVER_REPRESENTED.contains(p)).map(|(_, c)| c).sum();
    let (pool, budget): (Vec<AntiPatternId>, usize) = if rare <= target {
        (census.keys().copied().filter(|p| OVER_REPRESENTED.contains(p)).collect(), target - rare)
    } else {
        (census.keys().copied().collect(), target)
    };
    let weights: Vec<u64> = pool.iter().map(|p| census[p] as u64).collect();
    let shares = largest_remainder(budget, &weights);
    let mut out = census.clone();
    for (p, s) in pool.iter().zip(shares) {
        out.insert(*p, s);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuiltDataset {
    pub records: Vec<DatasetRecord>,
    pub excluded_by_budget: usize,
    /// Inconsistent records per pattern after the budget filter.
    pub census: BTreeMap<AntiPatternId, usize>,
    pub quotas: BTreeMap<AntiPatternId, usize>,
}

fn seeded_take(mut v: Vec<DatasetRecord>, n: usize, seed: u64) -> Vec<DatasetRecord> {
    if v.len() <= n {
        return v;
    }
    v.sort_by(|a, b| a.id.cmp(&b.id));
    v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    v.truncate(n);
    v
}

/// Filters both sides to the token budget and balances them.
pub fn build_dataset(
    consistent: Vec<DatasetRecord>,
    inconsistent: Vec<DatasetRecord>,
    budget: usize,
    seed: u64,
) -> BuiltDataset {
    let before = consistent.len() + inconsistent.len();
    let consistent: Vec<_> = consistent.into_iter().filter(|r| r.doc.token_count <= budget).collect();
    let inconsistent: Vec<_> = inconsistent.into_iter().filter(|r| r.doc.token_count <= budget).collect();
    let excluded_by_budget = before - consistent.len() - inconsistent.len();

    let mut by_pattern: BTreeMap<AntiPatternId, Vec<DatasetRecord>> = BTreeMap::new();
    for r in inconsistent {
        let p = r.pattern.expect("inconsistent records carry a pattern");
        by_pattern.entry(p).or_default().push(r);
    }
    let census: BTreeMap<AntiPatternId, usize> = by_pattern.iter().map(|(p, v)| (*p, v.len())).collect();
    let n_inc: usize = census.values().sum();
    let target = consistent.len().min(n_inc);
    let quotas = balance_quotas(&census, target);

    let mut records = seeded_take(consistent, target, super::mix(seed, "consistent"));
    for (p, v) in by_pattern {
        records.extend(seeded_take(v, quotas[&p], super::mix(seed, p.name())));
    }
    records.sort_by(|a, b| a.id.cmp(&b.id));
    BuiltDataset { records, excluded_by_budget, census, quotas }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub schema: String,
    pub ratios: [u32; 3],
    pub seed: u64,
    pub stratified: bool,
    pub assignment: BTreeMap<String, Split>,
    pub excluded_family: Option<String>,
    /// Records withheld from training by a leave-family-out split.
    #[serde(default)]
    pub excluded: Vec<String>,
}

impl SplitManifest {
    pub fn ids(&self, which: Split) -> Vec<&str> {
        self.assignment.iter().filter(|(_, s)| **s == which).map(|(id, _)| id.as_str()).collect()
    }

    pub fn sizes(&self) -> [usize; 3] {
        [Split::Train, Split::Val, Split::Test].map(|s| self.assignment.values().filter(|x| **x == s).count())
    }
}

pub fn split_sizes(n: usize, ratios: [u32; 3]) -> [usize; 3] {
    let v = largest_remainder(n, &ratios.map(u64::from));
    [v[0], v[1], v[2]]
}

fn check_ratios(ratios: [u32; 3]) -> Result<(), CorpusError> {
    if ratios.iter().sum::<u32>() != 100 {
        return Err(CorpusError::Config(format!("split ratios {ratios:?} do not sum to 100")));
    }
    Ok(())
}

/// Seeded shuffle, then contiguous slices of largest-remainder sizes. When
/// stratified, each label is shuffled on its own and the two are
/// interleaved evenly first, so every slice keeps the global balance.
pub fn split(records: &[DatasetRecord], ratios: [u32; 3], seed: u64, stratified: bool) -> Result<SplitManifest, CorpusError> {
    check_ratios(ratios)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<(&str, Label)> = records.iter().map(|r| (r.id.as_str(), r.label)).collect();
    ids.sort();
    let order: Vec<&str> = if stratified {
        let mut groups: Vec<Vec<&str>> = [Label::Consistent, Label::Inconsistent]
            .iter()
            .map(|l| ids.iter().filter(|(_, x)| x == l).map(|(i, _)| *i).collect())
            .collect();
        for g in &mut groups {
            g.shuffle(&mut rng);
        }
        interleave(groups)
    } else {
        let mut v: Vec<&str> = ids.iter().map(|(i, _)| *i).collect();
        v.shuffle(&mut rng);
        v
    };
    let [a, b, _] = split_sizes(order.len(), ratios);
    let assignment = order
        .into_iter()
        .enumerate()
        .map(|(k, id)| {
            let s = if k < a {
                Split::Train
            } else if k < a + b {
                Split::Val
            } else {
                Split::Test
            };
            (id.to_string(), s)
        })
        .collect();
    Ok(SplitManifest {
        schema: SPLIT_SCHEMA.into(),
        ratios,
        seed,
        stratified,
        assignment,
        excluded_family: None,
        excluded: vec![],
    })
}

/// Merges groups so that every prefix holds each group in proportion.
fn interleave(groups: Vec<Vec<&str>>) -> Vec<&str> {
    let total: usize = groups.iter().map(Vec::len).sum();
    let mut taken = vec![0usize; groups.len()];
    let mut out = Vec::with_capacity(total);
    for _ in 0..total {
        // the group furthest behind its share, measured as (taken + 0.5) / size
        let g = (0..groups.len())
            .filter(|&g| taken[g] < groups[g].len())
            .min_by(|&x, &y| {
                let fx = (2 * taken[x] + 1) as u128 * groups[y].len() as u128;
                let fy = (2 * taken[y] + 1) as u128 * groups[x].len() as u128;
                fx.cmp(&fy).then(x.cmp(&y))
            })
            .expect("some group has records left");
        out.push(groups[g][taken[g]]);
        taken[g] += 1;
    }
    out
}

/// The base split with one family's records dropped from train only.
pub fn leave_family_out(
    records: &[DatasetRecord],
    ratios: [u32; 3],
    seed: u64,
    stratified: bool,
    family: &str,
) -> Result<SplitManifest, CorpusError> {
    let fam: Family = family.parse().map_err(|_| CorpusError::UnknownFamily(family.to_string()))?;
    let mut m = split(records, ratios, seed, stratified)?;
    for r in records.iter().filter(|r| r.family() == Some(fam)) {
        if m.assignment.get(&r.id) == Some(&Split::Train) {
            m.assignment.remove(&r.id);
            m.excluded.push(r.id.clone());
        }
    }
    m.excluded.sort();
    m.excluded_family = Some(fam.name().to_string());
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub pred: u8,
    pub score: f64,
}

pub fn read_predictions(r: impl BufRead) -> Result<Vec<Prediction>, CorpusError> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            let p: Prediction = serde_json::from_str(&line)?;
            if p.pred > 1 {
                return Err(CorpusError::Config(format!("prediction {} for {} is not 0 or 1", p.pred, p.id)));
            }
            out.push(p);
        }
    }
    Ok(out)
}

pub fn write_predictions(w: &mut impl Write, preds: &[Prediction]) -> Result<(), CorpusError> {
    for p in preds {
        serde_json::to_writer(&mut *w, p)?;
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternRecall {
    pub total: usize,
    pub detected: usize,
    pub recall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub schema: String,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub per_pattern: BTreeMap<String, PatternRecall>,
}

/// Confusion counts with "inconsistent" as the positive class.
pub fn evaluate(predictions: &BTreeMap<String, u8>, records: &[&DatasetRecord]) -> Result<Metrics, CorpusError> {
    tally(
        predictions,
        records.iter().map(|r| (r.id.as_str(), r.label == Label::Inconsistent, r.pattern.map(AntiPatternId::name))),
    )
}

/// [`evaluate`] over lines read back from a dataset file.
pub fn evaluate_lines(predictions: &BTreeMap<String, u8>, lines: &[&DatasetLine]) -> Result<Metrics, CorpusError> {
    tally(predictions, lines.iter().map(|l| (l.id.as_str(), l.label == 1, l.pattern.as_deref())))
}

fn tally<'a>(
    predictions: &BTreeMap<String, u8>,
    records: impl Iterator<Item = (&'a str, bool, Option<&'a str>)>,
) -> Result<Metrics, CorpusError> {
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    let mut per: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (id, positive, pattern) in records {
        let pred = *predictions.get(id).ok_or_else(|| CorpusError::MissingPrediction(id.to_string()))?;
        match (positive, pred == 1) {
            (true, true) => tp += 1,
            (true, false) => fn_ += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
        }
        if let Some(p) = pattern {
            let e = per.entry(p.to_string()).or_default();
            e.0 += 1;
            e.1 += usize::from(pred == 1);
        }
    }
    let total = tp + fp + tn + fn_;
    let ratio = |a: usize, b: usize| if b == 0 { None } else { Some(a as f64 / b as f64) };
    Ok(Metrics {
        schema: METRICS_SCHEMA.into(),
        tp,
        fp,
        tn,
        fn_,
        accuracy: ratio(tp + tn, total).unwrap_or(0.0),
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        per_pattern: per
            .into_iter()
            .map(|(p, (total, detected))| (p, PatternRecall { total, detected, recall: detected as f64 / total as f64 }))
            .collect(),
    })
}
