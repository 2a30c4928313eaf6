use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use ontocheck_core::antipattern::inject_with;
use ontocheck_core::corpus::{
    dataset_from_modules, evaluate_lines, generate_synthetic, mix, read_dataset_lines, read_predictions, run_pipeline,
    PipelineConfig, Provenance, Split, SplitManifest, SynthConfig,
};
use ontocheck_core::embed::{module_corpus, train_skipgram, TrainConfig, WalkCorpus};
use ontocheck_core::modularize::modularize as split_modules;
use ontocheck_core::tableau::{classify_with, TableauConfig, Witness};
use ontocheck_core::translate::{to_triples, TripleRecord};
use ontocheck_core::{Ontology, OntologyStatus};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{emit, expand_inputs, file_stem, read_omn, stamp, write_file, write_omn, UsageError};
use crate::{BuildArgs, CheckArgs, DatasetOptions, EmbedArgs, EvalArgs, GenArgs, InjectArgs, ModularizeArgs, PipelineArgs, TableFormat, TranslateArgs};

/// Reads an ontology and names it after its file when the text gives no IRI.
fn load(path: &Path) -> Result<Ontology> {
    let mut o = read_omn(path)?;
    if o.id.is_empty() {
        o.id = path.file_stem().map_or_else(|| "ontology".into(), |s| s.to_string_lossy().into_owned());
    }
    Ok(o)
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<Ontology>> {
    expand_inputs(paths)?.par_iter().map(|p| load(p)).collect()
}

pub fn modularize(a: &ModularizeArgs) -> Result<()> {
    let p = Provenance::new(0, a);
    let o = load(&a.input)?;
    let m = split_modules(&o, a.k)?;
    for r in &m.modules {
        write_omn(&a.out.join(format!("{}.omn", file_stem(&r.module.id))), &r.module, &p)?;
    }
    let manifest = stamp(&m.manifest(), &p)?;
    emit(&manifest, Some(&a.out.join("manifest.json")))?;
    emit(&manifest, None)
}

pub fn inject(a: &InjectArgs) -> Result<()> {
    let p = Provenance::new(a.seed, a);
    let o = load(&a.input)?;
    let (injected, rep) = inject_with(&o, a.pattern, a.seed, usize::from(a.max_missing))?;
    write_omn(&a.out, &injected, &p)?;
    let report = json!({
        "schema": "ontocheck.injection/1",
        "source": o.id,
        "pattern": a.pattern.name(),
        "injected_axioms": rep.injected_axioms.len(),
        "binding": rep.binding.describe(),
        "output": a.out,
    });
    emit(&stamp(&report, &p)?, None)
}

pub fn translate(a: &TranslateArgs) -> Result<()> {
    let p = Provenance::new(0, a);
    let sink: Box<dyn Write> = match &a.out {
        Some(path) => {
            if let Some(d) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(d)?;
            }
            Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?)
        }
        None => Box::new(io::stdout().lock()),
    };
    let mut w = BufWriter::new(sink);
    writeln!(w, "{}", json!({ "schema": "ontocheck.triples/1", "provenance": p, "budget": a.budget }))?;
    let mut excluded = 0;
    for path in expand_inputs(&a.inputs)? {
        let doc = to_triples(&load(&path)?);
        if doc.token_count > a.budget {
            log::info!("{} exceeds the token budget with {} tokens", doc.id, doc.token_count);
            excluded += 1;
            continue;
        }
        serde_json::to_writer(&mut w, &TripleRecord::from(&doc))?;
        writeln!(w)?;
    }
    w.flush()?;
    if excluded > 0 {
        eprintln!("{excluded} document(s) over the token budget were left out");
    }
    Ok(())
}

pub fn embed(a: &EmbedArgs) -> Result<()> {
    let p = Provenance::new(a.seed, a);
    let sources = load_all(&a.inputs)?;
    let corpora: Vec<WalkCorpus> = sources.par_iter().map(|o| module_corpus(o, mix(a.seed, &o.id))).collect();
    let mut corpus = WalkCorpus::default();
    for c in corpora {
        corpus.extend(c);
    }
    let cfg = TrainConfig {
        dim: a.dim,
        window: a.window,
        epochs: a.epochs,
        negatives: a.negatives,
        learning_rate: a.learning_rate,
        min_count: a.min_count,
        seed: a.seed,
        ..TrainConfig::default()
    };
    let (table, report) = train_skipgram(&corpus, &cfg)?;
    let mut buf = Vec::new();
    match a.format {
        TableFormat::Bin => table.write_binary(&mut buf)?,
        TableFormat::Jsonl => table.write_jsonl(&mut buf)?,
    }
    write_file(&a.out, &buf)?;
    let meta = json!({
        "schema": "ontocheck.embeddings/1",
        "format": a.format,
        "dim": table.dim(),
        "vocab_size": table.len(),
        "sources": sources.len(),
        "epoch_losses": report.epoch_losses,
    });
    let meta = stamp(&meta, &p)?;
    emit(&meta, Some(&a.out.with_extension("meta.json")))?;
    emit(&meta, None)
}

fn dataset_config(o: &DatasetOptions) -> Result<PipelineConfig> {
    let ratios: [u32; 3] = o.ratios.clone().try_into().map_err(|_| UsageError("--ratios takes three numbers".into()))?;
    if ratios.iter().sum::<u32>() != 100 {
        return Err(UsageError(format!("--ratios {ratios:?} must sum to 100")).into());
    }
    Ok(PipelineConfig {
        seed: o.seed,
        budget: o.budget,
        patterns: o.patterns.iter().map(|p| p.name().to_string()).collect(),
        max_missing: usize::from(o.max_missing),
        ratios,
        stratified: !o.no_stratify,
        ..PipelineConfig::default()
    })
}

pub fn build_dataset(a: &BuildArgs) -> Result<()> {
    let cfg = dataset_config(&a.options)?;
    let p = Provenance::new(cfg.seed, &cfg);
    let modules = load_all(&a.inputs)?;
    if modules.is_empty() {
        bail!("no modules found");
    }
    let out = dataset_from_modules(modules, &cfg)?;
    out.write(&a.out, &p)?;
    emit(&stamp(&out.report, &p)?, None)
}

fn check_one(o: &Ontology, trace: bool) -> Result<Value> {
    let cfg = if trace { TableauConfig::default() } else { TableauConfig::untraced() };
    let start = Instant::now();
    let v = classify_with(o, &cfg)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let unsat: Vec<String> = match &v.status {
        OntologyStatus::Incoherent(cs) => cs.iter().map(|c| c.local().to_string()).collect(),
        _ => vec![],
    };
    let mut out = json!({ "id": o.id, "status": v.status.label(), "unsat_classes": unsat });
    if trace {
        match &v.witness {
            Witness::Clash(t) => out["clash_trace"] = t.to_json(),
            Witness::Incoherence { refutations, .. } => {
                let m: serde_json::Map<String, Value> = refutations.iter().map(|(c, t)| (c.local().to_string(), t.to_json())).collect();
                out["clash_trace"] = Value::Object(m);
            }
            Witness::Model(_) => {}
        }
    }
    out["wall_time_ms"] = json!(ms);
    Ok(out)
}

pub fn check(a: &CheckArgs) -> Result<()> {
    let p = Provenance::new(0, a);
    let paths = expand_inputs(&a.inputs)?;
    let results: Vec<Value> = paths
        .par_iter()
        .map(|path| {
            let o = load(path)?;
            let mut v = check_one(&o, a.trace)?;
            v["file"] = json!(path);
            v["provenance"] = serde_json::to_value(&p)?;
            Ok(v)
        })
        .collect::<Result<_>>()?;
    let mut text = String::new();
    for v in &results {
        text.push_str(&serde_json::to_string(v)?);
        text.push('\n');
    }
    match &a.out {
        Some(path) => write_file(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn eval(a: &EvalArgs) -> Result<()> {
    let p = Provenance::new(0, a);
    let open = |path: &Path| File::open(path).map(BufReader::new).with_context(|| format!("opening {}", path.display()));
    let lines = read_dataset_lines(open(&a.dataset)?)?;
    let preds: BTreeMap<String, u8> = read_predictions(open(&a.predictions)?)?.into_iter().map(|x| (x.id, x.pred)).collect();
    let chosen: Vec<_> = match (&a.split, a.part.as_deref()) {
        (Some(path), Some(part)) => {
            let m: SplitManifest = serde_json::from_reader(open(path)?).with_context(|| format!("reading {}", path.display()))?;
            let want = match part {
                "train" => Split::Train,
                "val" => Split::Val,
                _ => Split::Test,
            };
            lines.iter().filter(|l| m.assignment.get(&l.id) == Some(&want)).collect()
        }
        (None, None) => lines.iter().collect(),
        _ => return Err(UsageError("--split and --part go together".into()).into()),
    };
    let metrics = evaluate_lines(&preds, &chosen)?;
    emit(&stamp(&metrics, &p)?, a.out.as_deref())
}

pub fn gen(a: &GenArgs) -> Result<()> {
    let cfg = SynthConfig { n_ontologies: a.n, seed: a.seed, ..SynthConfig::default() };
    let p = Provenance::new(a.seed, &cfg);
    let onts = generate_synthetic(&cfg)?;
    let mut files = Vec::new();
    for o in &onts {
        let path = a.out.join(format!("{}.omn", file_stem(&o.id)));
        write_omn(&path, o, &p)?;
        files.push(path);
    }
    emit(&stamp(&json!({ "schema": "ontocheck.gen/1", "files": files }), &p)?, None)
}

pub fn pipeline(a: &PipelineArgs) -> Result<()> {
    let mut cfg: PipelineConfig = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => PipelineConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.n {
        cfg.synth.n_ontologies = n;
    }
    if let Some(b) = a.budget {
        cfg.budget = b;
    }
    if !a.patterns.is_empty() {
        cfg.patterns = a.patterns.iter().map(|p| p.name().to_string()).collect();
    }
    if a.embed || a.dim.is_some() {
        let mut e = cfg.embed.take().unwrap_or_default();
        if let Some(d) = a.dim {
            e.dim = d;
        }
        cfg.embed = Some(e);
    }
    let p = Provenance::new(cfg.seed, &cfg);
    let out = run_pipeline(&cfg)?;
    out.write(&a.out, &p)?;
    emit(&stamp(&out.report, &p)?, None)
}
