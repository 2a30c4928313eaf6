use criterion::{criterion_group, criterion_main, Criterion};
use ontocheck_bench::desk_modules;
use ontocheck_core::embed::{module_corpus, train_skipgram, TrainConfig, WalkCorpus};
use ontocheck_core::manchester::{parse, serialize};
use ontocheck_core::translate::to_triples;

fn manchester(c: &mut Criterion) {
    let modules = desk_modules(5, 2);
    let texts: Vec<String> = modules.iter().map(serialize).collect();
    c.bench_function("manchester/serialize", |b| b.iter(|| modules.iter().map(|m| serialize(m).len()).sum::<usize>()));
    c.bench_function("manchester/parse", |b| b.iter(|| texts.iter().map(|t| parse(t).unwrap().axioms.len()).sum::<usize>()));
    c.bench_function("translate/triples", |b| b.iter(|| modules.iter().map(|m| to_triples(m).token_count).sum::<usize>()));
}

fn skipgram(c: &mut Criterion) {
    let modules = desk_modules(3, 3);
    let mut corpus = WalkCorpus::default();
    for (i, m) in modules.iter().enumerate() {
        corpus.extend(module_corpus(m, i as u64));
    }
    let cfg = TrainConfig { dim: 32, epochs: 1, ..TrainConfig::default() };
    let mut g = c.benchmark_group("embed");
    g.sample_size(10);
    g.bench_function("sgns/epoch", |b| b.iter(|| train_skipgram(&corpus, &cfg).unwrap().1.pairs_per_epoch));
    g.finish();
}

criterion_group!(benches, manchester, skipgram);
criterion_main!(benches);
