use std::collections::{BTreeMap, BTreeSet};

use ontocheck_core::antipattern::{inject, AntiPatternId, Family, SiteIter};
use ontocheck_core::corpus::*;
use ontocheck_core::tableau::classify_status;
use ontocheck_core::translate::{to_triples, Label};
use ontocheck_core::{Axiom, ClassExpression as CE, EntityName, Ontology, OntologyStatus};

fn rec(id: &str, pattern: Option<AntiPatternId>) -> DatasetRecord {
    let o = Ontology::new(id, vec![Axiom::sub_class(&EntityName::class("A"), CE::named(&EntityName::class("B")))]);
    let label = if pattern.is_some() { Label::Inconsistent } else { Label::Consistent };
    DatasetRecord {
        id: id.into(),
        source_module: id.into(),
        doc: to_triples(&o),
        ontology: o,
        embedding: None,
        label,
        pattern,
        injected_axioms: usize::from(pattern.is_some()),
        semantic_status: None,
    }
}

fn consistent(n: usize) -> Vec<DatasetRecord> {
    (0..n).map(|i| rec(&format!("c{i:05}"), None)).collect()
}

fn inconsistent(counts: &[(AntiPatternId, usize)]) -> Vec<DatasetRecord> {
    counts
        .iter()
        .flat_map(|&(p, n)| (0..n).map(move |i| rec(&format!("i_{}_{i:05}", p.name()), Some(p))))
        .collect()
}

/// Hamilton apportionment by repeatedly handing a seat to the part whose
/// exact share exceeds its seats the most.
fn hamilton(total: usize, weights: &[u64]) -> Vec<usize> {
    let sum: u64 = weights.iter().sum();
    let mut seats: Vec<usize> = weights.iter().map(|&w| (total as u64 * w / sum) as usize).collect();
    while seats.iter().sum::<usize>() < total {
        // deficit_i = w_i * total / sum - seats_i, compared over a common denominator
        let best = (0..weights.len())
            .max_by(|&a, &b| {
                let da = weights[a] as i128 * total as i128 - seats[a] as i128 * sum as i128;
                let db = weights[b] as i128 * total as i128 - seats[b] as i128 * sum as i128;
                da.cmp(&db).then(b.cmp(&a))
            })
            .unwrap();
        seats[best] += 1;
    }
    seats
}

#[test]
fn synthetic_corpus_is_consistent_and_deterministic() {
    let cfg = SynthConfig { n_ontologies: 1, seed: 42, ..Default::default() };
    let a = generate_synthetic(&cfg).unwrap();
    let b = generate_synthetic(&cfg).unwrap();
    assert_eq!(a, b);
    let many = generate_synthetic(&SynthConfig { n_ontologies: 12, seed: 5, ..Default::default() }).unwrap();
    for o in &many {
        assert_eq!(classify_status(o).unwrap(), OntologyStatus::ConsistentCoherent, "{}", o.id);
        let has = |f: &dyn Fn(&Axiom) -> bool| o.axioms.iter().any(f);
        assert!(has(&|a| matches!(a, Axiom::SubClassOf { sup: CE::Named(_), .. })));
        assert!(has(&|a| matches!(a, Axiom::Domain { .. })));
        assert!(has(&|a| matches!(a, Axiom::Range { .. })));
        assert!(has(&|a| matches!(a, Axiom::ClassAssertion { .. })));
    }
    assert!(many.iter().any(|o| o.axioms.iter().any(|a| matches!(a, Axiom::DisjointClasses(..)))));
    assert!(SynthConfig { classes: (0, 3), ..Default::default() }.validate().is_err());
}

#[test]
fn at_least_eight_patterns_are_injectable() {
    let corpus = generate_synthetic(&SynthConfig { n_ontologies: 200, seed: 1, ..Default::default() }).unwrap();
    let mut found = BTreeSet::new();
    for id in AntiPatternId::ALL {
        let t = id.template();
        if corpus.iter().any(|o| SiteIter::new(o, &t, 1, 2).next().is_some()) {
            found.insert(id);
        }
    }
    assert!(found.len() >= 8, "{found:?}");
}

#[test]
fn balancing_preserves_the_big_four_proportions() {
    let counts = [
        (AntiPatternId::EID, 180),
        (AntiPatternId::CSC, 150),
        (AntiPatternId::UE, 90),
        (AntiPatternId::AIO, 60),
        (AntiPatternId::OOD, 12),
        (AntiPatternId::SOSINETO, 8),
    ];
    let built = build_dataset(consistent(300), inconsistent(&counts), 4096, 3);
    let n = |l: Label| built.records.iter().filter(|r| r.label == l).count();
    assert_eq!((n(Label::Consistent), n(Label::Inconsistent)), (300, 300));
    let got = |p: AntiPatternId| built.records.iter().filter(|r| r.pattern == Some(p)).count();
    assert_eq!((got(AntiPatternId::OOD), got(AntiPatternId::SOSINETO)), (12, 8));
    let big: u64 = 180 + 150 + 90 + 60;
    for &(p, c) in &counts[..4] {
        let exact = 280.0 * c as f64 / big as f64;
        assert!((got(p) as f64 - exact).abs() <= 1.0, "{p}: {} vs {exact}", got(p));
    }
    for r in &built.records {
        assert_eq!(r.label == Label::Inconsistent, r.pattern.is_some());
    }

    let equal = build_dataset(consistent(20), inconsistent(&[(AntiPatternId::EID, 20)]), 4096, 0);
    assert_eq!(equal.records.len(), 40);
    assert_eq!(equal.quotas, equal.census);

    let tiny = build_dataset(consistent(10), inconsistent(&[(AntiPatternId::EID, 10)]), 3, 0);
    assert_eq!((tiny.records.len(), tiny.excluded_by_budget), (0, 20));
}

#[test]
fn paper_census_quotas_are_proportional() {
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
    assert_eq!(q.values().sum::<usize>(), 4169);
    for (p, c) in &census {
        if !OVER_REPRESENTED.contains(p) {
            assert_eq!(q[p], *c);
        }
    }
    let big = [AIO, EID, UE, CSC];
    let want = hamilton(4169 - 208, &big.map(|p| census[&p] as u64));
    assert_eq!(big.map(|p| q[&p]).to_vec(), want);
}

#[test]
fn largest_remainder_agrees_with_hamilton() {
    for (total, w) in [(8338, vec![70, 15, 15]), (10, vec![70, 15, 15]), (7, vec![1, 1, 1]), (100, vec![3, 0, 7, 13])] {
        assert_eq!(largest_remainder(total, &w), hamilton(total, &w));
    }
    assert_eq!(split_sizes(8338, [70, 15, 15]), [5836, 1251, 1251]);
    assert_eq!(split_sizes(10, [70, 15, 15]), [7, 2, 1]);
}

fn mixed(n: usize) -> Vec<DatasetRecord> {
    let mut v = consistent(n);
    let fams = [AntiPatternId::EID, AntiPatternId::CSC, AntiPatternId::OIL, AntiPatternId::OILWI, AntiPatternId::UE];
    v.extend((0..n).map(|i| rec(&format!("i{i:05}"), Some(fams[i % fams.len()]))));
    v
}

#[test]
fn splits_are_exhaustive_stratified_and_reproducible() {
    let records = mixed(500);
    let m = split(&records, [70, 15, 15], 9, true).unwrap();
    assert_eq!(m, split(&records, [70, 15, 15], 9, true).unwrap());
    assert_eq!(m.assignment.len(), records.len());
    assert_eq!(m.sizes(), split_sizes(1000, [70, 15, 15]));
    let labels: BTreeMap<&str, Label> = records.iter().map(|r| (r.id.as_str(), r.label)).collect();
    for s in [Split::Train, Split::Val, Split::Test] {
        let ids = m.ids(s);
        let pos = ids.iter().filter(|i| labels[*i] == Label::Inconsistent).count();
        let share = pos as f64 / ids.len() as f64;
        assert!((share - 0.5).abs() <= 0.02, "{s:?}: {share}");
    }
    assert_ne!(m.assignment, split(&records, [70, 15, 15], 10, true).unwrap().assignment);
    assert!(split(&records, [70, 15, 14], 9, true).is_err());
    let plain = split(&records, [70, 15, 15], 9, false).unwrap();
    assert_eq!(plain.sizes(), m.sizes());
}

#[test]
fn leave_family_out_touches_train_only() {
    let records = mixed(200);
    let base = split(&records, [70, 15, 15], 4, true).unwrap();
    let oil = leave_family_out(&records, [70, 15, 15], 4, true, "OIL*").unwrap();
    let fam: BTreeMap<&str, Option<Family>> = records.iter().map(|r| (r.id.as_str(), r.family())).collect();
    assert!(oil.ids(Split::Train).iter().all(|i| fam[i] != Some(Family::OIL)));
    assert!(!oil.excluded.is_empty());
    for s in [Split::Val, Split::Test] {
        assert_eq!(oil.ids(s), base.ids(s));
    }
    let csc = leave_family_out(&records, [70, 15, 15], 4, true, "CSC").unwrap();
    let count = |m: &SplitManifest| m.ids(Split::Test).iter().filter(|i| fam[*i] == Some(Family::CSC)).count();
    assert_eq!(count(&csc), count(&base));
    let absent = leave_family_out(&records, [70, 15, 15], 4, true, "SOSINETO").unwrap();
    assert_eq!(absent.assignment, base.assignment);
    assert!(matches!(leave_family_out(&records, [70, 15, 15], 4, true, "XYZ"), Err(CorpusError::UnknownFamily(_))));
}

#[test]
fn evaluation_examples() {
    let records = mixed(10);
    let refs: Vec<&DatasetRecord> = records.iter().collect();
    let truth: BTreeMap<String, u8> = records.iter().map(|r| (r.id.clone(), r.label.as_int())).collect();
    let m = evaluate(&truth, &refs).unwrap();
    assert_eq!((m.accuracy, m.precision, m.recall), (1.0, Some(1.0), Some(1.0)));

    let all_pos: BTreeMap<String, u8> = records.iter().map(|r| (r.id.clone(), 1)).collect();
    let m = evaluate(&all_pos, &refs).unwrap();
    assert_eq!((m.accuracy, m.recall), (0.5, Some(1.0)));
    assert_eq!((m.tp, m.fp, m.tn, m.fn_), (10, 10, 0, 0));

    let none: BTreeMap<String, u8> = records.iter().map(|r| (r.id.clone(), 0)).collect();
    let m = evaluate(&none, &refs).unwrap();
    assert_eq!((m.precision, m.recall), (None, Some(0.0)));
    assert_eq!(m.accuracy, (m.tp + m.tn) as f64 / 20.0);
    assert!(m.per_pattern.values().all(|p| p.detected == 0));

    let mut partial = truth.clone();
    partial.remove(&records[0].id);
    assert!(matches!(evaluate(&partial, &refs), Err(CorpusError::MissingPrediction(_))));
}

#[test]
fn tableau_as_classifier_recalls_every_semantic_pattern() {
    let semantic: Vec<AntiPatternId> = AntiPatternId::ALL.into_iter().filter(|p| p.is_semantic()).collect();
    let cfg = PipelineConfig {
        seed: 2,
        synth: SynthConfig { n_ontologies: 8, ..Default::default() },
        patterns: semantic.iter().map(|p| p.name().to_string()).collect(),
        ..Default::default()
    };
    let out = run_pipeline(&cfg).unwrap();
    let refs: Vec<&DatasetRecord> = out.records.iter().collect();
    let preds: BTreeMap<String, u8> = out
        .records
        .iter()
        .map(|r| (r.id.clone(), u8::from(!classify_status(&r.ontology).unwrap().is_consistent_coherent())))
        .collect();
    let m = evaluate(&preds, &refs).unwrap();
    assert!(m.tp > 0);
    assert_eq!((m.recall, m.precision, m.accuracy), (Some(1.0), Some(1.0), 1.0));
}

#[test]
fn secondary_interfaces_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        seed: 7,
        synth: SynthConfig { n_ontologies: 4, ..Default::default() },
        embed: Some(EmbedSettings { dim: 8, epochs: 1, walks_per_node: 2, ..Default::default() }),
        ..Default::default()
    };
    let out = run_pipeline(&cfg).unwrap();
    out.write(dir.path(), &Provenance::new(cfg.seed, &cfg)).unwrap();

    let lines = read_dataset_lines(std::io::BufReader::new(std::fs::File::open(dir.path().join("dataset.jsonl")).unwrap())).unwrap();
    assert_eq!(lines.len(), out.records.len());
    for (l, r) in lines.iter().zip(&out.records) {
        assert_eq!(l, &r.to_line());
        assert_eq!(l.embedding.as_ref().map(Vec::len), Some(8));
        assert_eq!(l.label == 1, l.pattern.is_some());
    }
    assert!(matches!(read_dataset_lines("{\"schema\":\"other/1\"}\n".as_bytes()), Err(CorpusError::SchemaMismatch(_))));

    let split_json: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("split.json")).unwrap()).unwrap();
    assert_eq!(split_json["provenance"]["seed"], 7);
    let manifest: SplitManifest = serde_json::from_value(split_json).unwrap();
    assert_eq!(manifest, out.manifest);

    let mut f = std::fs::File::open(dir.path().join("embeddings.bin")).unwrap();
    let table = ontocheck_core::embed::EmbeddingTable::read_binary(&mut f).unwrap();
    assert_eq!(Some(&table), out.embeddings.as_ref());

    let preds = vec![Prediction { id: "a".into(), pred: 1, score: 0.75 }, Prediction { id: "b".into(), pred: 0, score: 0.1 }];
    let mut buf = Vec::new();
    write_predictions(&mut buf, &preds).unwrap();
    assert_eq!(read_predictions(buf.as_slice()).unwrap(), preds);
    assert!(read_predictions("{\"id\":\"x\",\"pred\":3,\"score\":0}".as_bytes()).is_err());

    let refs: Vec<&DatasetRecord> = out.records.iter().collect();
    let truth: BTreeMap<String, u8> = out.records.iter().map(|r| (r.id.clone(), r.label.as_int())).collect();
    let m = evaluate(&truth, &refs).unwrap();
    let js = serde_json::to_value(&m).unwrap();
    for k in ["tp", "fp", "tn", "fn", "accuracy", "precision", "recall", "per_pattern", "schema"] {
        assert!(js.get(k).is_some(), "{k}");
    }
    assert_eq!(serde_json::from_value::<Metrics>(js).unwrap(), m);
}

#[test]
fn pipeline_reruns_are_byte_identical() {
    let cfg = PipelineConfig { seed: 11, synth: SynthConfig { n_ontologies: 3, ..Default::default() }, ..Default::default() };
    let read = |d: &std::path::Path| {
        ["dataset.jsonl", "split.json", "report.json"].map(|f| std::fs::read(d.join(f)).unwrap())
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let p = Provenance::new(cfg.seed, &cfg);
    run_pipeline(&cfg).unwrap().write(a.path(), &p).unwrap();
    run_pipeline(&cfg).unwrap().write(b.path(), &p).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn pipeline_labels_are_sound() {
    let cfg = PipelineConfig { seed: 3, synth: SynthConfig { n_ontologies: 6, ..Default::default() }, ..Default::default() };
    let out = run_pipeline(&cfg).unwrap();
    let n = |l: Label| out.records.iter().filter(|r| r.label == l).count();
    assert_eq!(n(Label::Consistent), n(Label::Inconsistent));
    for r in &out.records {
        let s = r.semantic_status.as_ref().unwrap();
        match r.pattern {
            None => assert!(s.is_consistent_coherent(), "{}", r.id),
            Some(p) if p.is_semantic() => assert!(!s.is_consistent_coherent(), "{}", r.id),
            Some(_) => {}
        }
        assert!((1..=2).contains(&r.injected_axioms) || r.pattern.is_none());
    }
}

#[test]
fn timing_reports() {
    let empty = time_harness("tableau", classify_status, &[]);
    assert_eq!((empty.total_ms, empty.records.len()), (0.0, 0));
    let o = generate_one(0, &SynthConfig::default()).unwrap();
    let o2 = inject(&o, AntiPatternId::EID, 0).map(|(x, _)| x).unwrap_or_else(|_| o.clone());
    let set = [&o, &o2];
    let report = TimingReport::new(vec![
        time_harness("tableau", classify_status, &set),
        time_harness("detector", ontocheck_core::antipattern::detect, &set),
    ]);
    let js = serde_json::to_value(&report).unwrap();
    assert_eq!(js["schema"], TIMING_SCHEMA);
    assert_eq!(js["checkers"].as_array().unwrap().len(), 2);
    assert_eq!(report.checkers[0].records.len(), 2);
}

#[test]
fn config_hash_tracks_the_config() {
    let a = PipelineConfig::default();
    let b = PipelineConfig { seed: 1, ..Default::default() };
    assert_eq!(config_hash(&a), config_hash(&a.clone()));
    assert_ne!(config_hash(&a), config_hash(&b));
    assert_eq!(config_hash(&a).len(), 16);
    assert!(matches!(
        run_pipeline(&PipelineConfig { patterns: vec!["NOPE".into()], ..Default::default() }),
        Err(CorpusError::Config(_))
    ));
}
