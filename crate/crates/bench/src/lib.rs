//! Shared inputs for the criterion benches.

use ontocheck_core::corpus::{generate_synthetic, SynthConfig};
use ontocheck_core::modularize::modularize;
use ontocheck_core::Ontology;

/// Modules cut from `n` synthetic ontologies, about twenty classes each.
pub fn desk_modules(n: usize, seed: u64) -> Vec<Ontology> {
    let sources = generate_synthetic(&SynthConfig { n_ontologies: n, seed, ..SynthConfig::default() }).expect("synthetic corpus");
    sources
        .iter()
        .flat_map(|o| {
            let k = o.classes().len().div_ceil(20).max(1);
            modularize(o, Some(k)).expect("enough classes").modules.into_iter().map(|m| m.module)
        })
        .collect()
}
