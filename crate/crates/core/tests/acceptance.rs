//! Acceptance suite. Prints one PASS or FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ontocheck_core::antipattern::{detect, inject, instance_fixture, partial_fixture, AntiPatternId, ExpectedStatus};
use ontocheck_core::corpus::{
    balance_quotas, generate_synthetic, run_pipeline, split_sizes, time_harness, PipelineConfig, PipelineOutput,
    Provenance, SynthConfig, TimingReport,
};
use ontocheck_core::embed::{mean_pool, pair_loss_and_grad, train_skipgram, EmbeddingTable, SentenceSource, TrainConfig, WalkCorpus};
use ontocheck_core::manchester::{parse, serialize};
use ontocheck_core::tableau::{classify_status, oracle_status};
use ontocheck_core::translate::Label;
use ontocheck_core::{Ontology, OntologyStatus};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn kind(s: &OntologyStatus) -> ExpectedStatus {
    match s {
        OntologyStatus::ConsistentCoherent => ExpectedStatus::ConsistentCoherent,
        OntologyStatus::Incoherent(_) => ExpectedStatus::Incoherent,
        OntologyStatus::Inconsistent(_) => ExpectedStatus::Inconsistent,
    }
}

fn pattern_table() -> Outcome {
    use AntiPatternId::*;
    let start = Instant::now();
    let want: BTreeMap<AntiPatternId, ExpectedStatus> = [
        (OOD, ExpectedStatus::Inconsistent),
        (OOR, ExpectedStatus::Inconsistent),
        (AIO, ExpectedStatus::Incoherent),
        (EID, ExpectedStatus::Incoherent),
        (UE, ExpectedStatus::Incoherent),
        (UEWI_2, ExpectedStatus::Incoherent),
        (UEWPI, ExpectedStatus::Incoherent),
        (UEWIP, ExpectedStatus::Incoherent),
        (SOSINETO, ExpectedStatus::Incoherent),
        (OIL, ExpectedStatus::ConsistentCoherent),
        (OILWI, ExpectedStatus::ConsistentCoherent),
        (OILWPI, ExpectedStatus::ConsistentCoherent),
        (UEWI_1, ExpectedStatus::ConsistentCoherent),
        (CSC, ExpectedStatus::ConsistentCoherent),
    ]
    .into_iter()
    .collect();
    ensure!(want.len() == 14, "table covers {} patterns", want.len());
    for id in AntiPatternId::ALL {
        let o = instance_fixture(id);
        let oracle = oracle_status(&o, 3).map_err(|e| format!("{id}: oracle {e}"))?;
        // the oracle confirms the expectation before the tableau is asked
        ensure!(kind(&oracle) == want[&id], "{id}: oracle says {oracle:?}");
        let tab = classify_status(&o).map_err(|e| format!("{id}: {e}"))?;
        ensure!(tab == oracle || (kind(&tab) == kind(&oracle) && kind(&tab) == ExpectedStatus::Inconsistent), "{id}: tableau {tab:?} vs oracle {oracle:?}");
    }
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(10), "took {took:?}");
    Ok(format!("14 fixtures in {took:.2?}"))
}

fn duality(out: &PipelineOutput) -> Outcome {
    let modules = &out.modules[..out.modules.len().min(600)];
    ensure!(modules.len() >= 500, "only {} modules", modules.len());
    let (mut cases, mut misses) = (0usize, Vec::new());
    for (i, m) in modules.iter().enumerate() {
        for id in AntiPatternId::ALL {
            let Ok((o, rep)) = inject(m, id, i as u64) else { continue };
            cases += 1;
            ensure!((1..=2).contains(&rep.injected_axioms.len()), "{} {id}: {} axioms injected", m.id, rep.injected_axioms.len());
            if !detect(&o).iter().any(|(p, _)| *p == id) {
                misses.push(format!("{}/{id}", m.id));
            }
        }
    }
    ensure!(misses.is_empty(), "{} of {cases} injections undetected, first {:?}", misses.len(), &misses[..misses.len().min(5)]);
    Ok(format!("{cases} injections over {} modules", modules.len()))
}

fn label_soundness(out: &PipelineOutput) -> Outcome {
    ensure!(out.report.modules >= 1000, "only {} modules", out.report.modules);
    let mut bad = Vec::new();
    for r in &out.records {
        let s = r.semantic_status.as_ref().ok_or_else(|| format!("{} has no status", r.id))?;
        let ok = match (r.label, r.pattern) {
            (Label::Consistent, _) => s.is_consistent_coherent(),
            (Label::Inconsistent, Some(p)) if p.is_semantic() => !s.is_consistent_coherent(),
            _ => true,
        };
        if !ok {
            bad.push(r.id.clone());
        }
    }
    ensure!(bad.is_empty(), "{} unsound labels, first {:?}", bad.len(), &bad[..bad.len().min(5)]);
    Ok(format!("{} modules, {} records", out.report.modules, out.records.len()))
}

const ALPHABET: &[&str] = &[
    "(", ")", ":", "<", ">", "#", "\"", ",", " ", "\n", "and", "or", "not", "some", "only", "max", "inverse", "Class:",
    "Prefix:", "SubClassOf:", "Types:", "Facts:", "0", "99999999999999999999", "é", "\u{0}", "owl:Thing", "x:",
];

fn mutate(text: &str, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    for _ in 0..rng.gen_range(1..=4) {
        let at = rng.gen_range(0..=chars.len());
        match rng.gen_range(0..4) {
            0 if !chars.is_empty() => {
                let end = (at + rng.gen_range(1..8)).min(chars.len());
                chars.drain(at.min(end)..end);
            }
            1 => {
                let piece = ALPHABET[rng.gen_range(0..ALPHABET.len())];
                chars.splice(at..at, piece.chars());
            }
            2 if !chars.is_empty() => {
                let start = rng.gen_range(0..chars.len());
                let end = (start + rng.gen_range(1..30)).min(chars.len());
                let span: Vec<char> = chars[start..end].to_vec();
                chars.splice(at..at, span);
            }
            _ => chars.insert(at, char::from_u32(rng.gen_range(0..0x3000)).unwrap_or('?')),
        }
    }
    chars.into_iter().collect()
}

fn round_trip() -> Outcome {
    let mut all: Vec<Ontology> = AntiPatternId::ALL.iter().flat_map(|&id| [instance_fixture(id), partial_fixture(id)]).collect();
    all.extend(generate_synthetic(&SynthConfig { n_ontologies: 100, seed: 5, ..Default::default() }).map_err(|e| e.to_string())?);
    for o in &all {
        let back = parse(&serialize(o)).map_err(|e| format!("{}: {e}", o.id))?;
        ensure!(back.same_content(o), "{} changed on round trip", o.id);
    }
    let seeds: Vec<String> = all.iter().take(40).map(serialize).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    let (mut accepted, mut rejected) = (0, 0);
    for k in 0..10_000 {
        let input = mutate(&seeds[k % seeds.len()], &mut rng);
        match panic::catch_unwind(|| parse(&input)) {
            Ok(Ok(_)) => accepted += 1,
            Ok(Err(e)) => {
                ensure!(e.offset <= input.len() && e.line >= 1, "bad error position {e:?}");
                rejected += 1;
            }
            Err(_) => return Err(format!("parser panicked on mutant {k}")),
        }
    }
    Ok(format!("{} ontologies; fuzz {accepted} parsed, {rejected} rejected", all.len()))
}

/// Hamilton apportionment, one seat at a time.
fn hamilton(total: usize, weights: &[u64]) -> Vec<usize> {
    let sum: u64 = weights.iter().sum();
    let mut seats: Vec<usize> = weights.iter().map(|&w| (total as u64 * w / sum) as usize).collect();
    while seats.iter().sum::<usize>() < total {
        let best = (0..weights.len())
            .max_by_key(|&i| (weights[i] as i128 * total as i128 - seats[i] as i128 * sum as i128, std::cmp::Reverse(i)))
            .unwrap();
        seats[best] += 1;
    }
    seats
}

fn dataset(out: &PipelineOutput) -> Outcome {
    let n = |l: Label| out.records.iter().filter(|r| r.label == l).count();
    ensure!(n(Label::Consistent) == n(Label::Inconsistent), "{} vs {}", n(Label::Consistent), n(Label::Inconsistent));
    let total = out.records.len();
    let sizes = out.manifest.sizes();
    let want = hamilton(total, &[70, 15, 15]);
    ensure!(sizes.to_vec() == want, "split {sizes:?}, expected {want:?}");
    for m in [10, 8338, 4169 * 2] {
        ensure!(split_sizes(m, [70, 15, 15]).to_vec() == hamilton(m, &[70, 15, 15]), "split_sizes({m})");
    }

    let cfg = PipelineConfig { seed: 9, synth: SynthConfig { n_ontologies: 4, ..Default::default() }, ..Default::default() };
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    let p = Provenance::new(cfg.seed, &cfg);
    for d in [&a, &b] {
        run_pipeline(&cfg).and_then(|o| o.write(d.path(), &p)).map_err(|e| e.to_string())?;
    }
    for f in ["dataset.jsonl", "split.json", "report.json"] {
        let x = std::fs::read(a.path().join(f)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.path().join(f)).map_err(|e| e.to_string())?;
        ensure!(x == y, "{f} differs between reruns");
    }

    use AntiPatternId::*;
    let census: BTreeMap<AntiPatternId, usize> = [
        (AIO, 1338),
        (EID, 3656),
        (OIL, 1),
        (OILWI, 1),
        (UE, 1357),
        (UEWI_1, 63),
        (UEWI_2, 62),
        (UEWPI, 4),
        (UEWIP, 20),
        (SOSINETO, 6),
        (OOR, 27),
        (OOD, 24),
        (CSC, 3520),
    ]
    .into_iter()
    .collect();
    let q = balance_quotas(&census, 4169);
    let got = [AIO, EID, UE, CSC].map(|p| q[&p]);
    let paper = [538, 1467, 544, 1412];
    ensure!(q.values().sum::<usize>() == 4169, "quotas sum to {}", q.values().sum::<usize>());
    ensure!(got == paper, "Table III census gives AIO/EID/UE/CSC {got:?}, published {paper:?}");
    Ok(format!("{total} records, split {sizes:?}"))
}

fn embedding_numerics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (d, k, h) = (10, 5, 1e-5);
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-8);
    let loss = |v: &[f64], u: &[f64], n: &[Vec<f64>]| {
        let refs: Vec<&[f64]> = n.iter().map(Vec::as_slice).collect();
        pair_loss_and_grad(v, u, &refs).loss
    };
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n: Vec<Vec<f64>> = (0..k).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let refs: Vec<&[f64]> = n.iter().map(Vec::as_slice).collect();
        let g = pair_loss_and_grad(&v, &u, &refs);
        for i in 0..d {
            let orig = v[i];
            v[i] = orig + h;
            let up = loss(&v, &u, &n);
            v[i] = orig - h;
            let down = loss(&v, &u, &n);
            v[i] = orig;
            worst = worst.max(rel(g.center[i], (up - down) / (2.0 * h)));
        }
    }
    ensure!(worst < 1e-4, "gradient relative error {worst:e}");

    let corpus = WalkCorpus {
        sentences: ["a b c a b c d", "d e f d e f a", "b c d e f a b"]
            .iter()
            .map(|s| (SentenceSource::Structure, s.split_whitespace().map(String::from).collect()))
            .collect(),
    };
    let cfg = TrainConfig { dim: 16, window: 2, epochs: 12, seed: 1, fixed_order: true, ..TrainConfig::default() };
    let (table, report) = train_skipgram(&corpus, &cfg).map_err(|e| e.to_string())?;
    ensure!(report.epoch_losses.windows(2).all(|w| w[1] <= w[0]), "losses {:?}", report.epoch_losses);

    let tokens: Vec<String> = table.tokens().to_vec();
    let tiny = EmbeddingTable::new(2, vec!["x".into(), "y".into()], vec![1.0, 2.0, 3.0, 4.0]).map_err(|e| e.to_string())?;
    ensure!(mean_pool(&["x", "y"], &tiny).map(|p| p.vector) == Ok(vec![2.0, 3.0]), "mean_pool example");
    for s in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let doc: Vec<&str> = (0..15).map(|_| tokens[rng.gen_range(0..tokens.len())].as_str()).collect();
        let mut shuffled = doc.clone();
        shuffled.shuffle(&mut rng);
        ensure!(mean_pool(&doc, &table) == mean_pool(&shuffled, &table), "mean_pool depends on order");
    }
    Ok(format!("max gradient error {worst:.1e}, {} epochs non-increasing", report.epoch_losses.len()))
}

fn performance(out: &PipelineOutput) -> Outcome {
    let set: Vec<&Ontology> = out.records.iter().map(|r| &r.ontology).take(1000).collect();
    ensure!(set.len() == 1000, "only {} records", set.len());
    let tableau = time_harness("tableau", classify_status, &set);
    let detector = time_harness("detector", detect, &set);
    let (t, d) = (tableau.total_ms / 1000.0, detector.total_ms / 1000.0);
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join("timing.json");
    let report = TimingReport::new(vec![tableau, detector]);
    std::fs::write(&path, serde_json::to_vec_pretty(&report).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure!(t < 300.0, "tableau took {t:.1} s");
    ensure!(d < 60.0, "detector took {d:.1} s");
    Ok(format!("tableau {t:.2} s, detector {d:.2} s, report {}", path.display()))
}

fn desk_corpus() -> Result<PipelineOutput, String> {
    let cfg = PipelineConfig { seed: 2024, synth: SynthConfig { n_ontologies: 500, seed: 2024, ..Default::default() }, ..Default::default() };
    run_pipeline(&cfg).map_err(|e| e.to_string())
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let res = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    let took = start.elapsed();
    match res {
        Ok(detail) => {
            println!("PASS {name} ({took:.1?}): {detail}");
            true
        }
        Err(why) => {
            println!("FAIL {name} ({took:.1?}): {why}");
            false
        }
    }
}

fn main() -> ExitCode {
    let built = desk_corpus();
    let corpus = &built;
    let with = |f: fn(&PipelineOutput) -> Outcome| move || corpus.as_ref().map_err(Clone::clone).and_then(f);
    let results = [
        run("pattern-semantics-table", pattern_table),
        run("detector-injector-duality", with(duality)),
        run("label-soundness", with(label_soundness)),
        run("parser-round-trip", round_trip),
        run("dataset-construction", with(dataset)),
        run("embedding-numerics", embedding_numerics),
        run("performance-bound", with(performance)),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
