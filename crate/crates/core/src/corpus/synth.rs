//! Desk-scale synthetic ontologies that stand in for a real repository.
//!
//! Construction keeps every generated ontology consistent and coherent:
//! disjointness only joins siblings, restriction fillers live under the
//! range of their property, universal fillers are ancestors of that range,
//! and individuals only take part in assertions their asserted class already
//! satisfies. The tableau confirms each result before it is returned.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::embed::mix_seed;
use crate::model::{Axiom, ClassExpression, EntityName, Ontology, OntologyStatus, RoleExpression};
use crate::tableau::classify_status;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_ontologies: usize,
    pub classes: (usize, usize),
    pub properties: (usize, usize),
    pub individuals: (usize, usize),
    /// Probability that two sibling classes are declared disjoint.
    pub disjoint_density: f64,
    pub existential_rate: f64,
    pub universal_rate: f64,
    pub seed: u64,
    pub max_retries: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_ontologies: 10,
            classes: (20, 60),
            properties: (2, 6),
            individuals: (3, 12),
            disjoint_density: 0.3,
            existential_rate: 0.3,
            universal_rate: 0.15,
            seed: 0,
            max_retries: 20,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        for (name, (lo, hi)) in [("classes", self.classes), ("properties", self.properties), ("individuals", self.individuals)] {
            if lo == 0 || lo > hi {
                return Err(CorpusError::Config(format!("{name} range must be positive and ordered")));
            }
        }
        for (name, p) in [
            ("disjoint_density", self.disjoint_density),
            ("existential_rate", self.existential_rate),
            ("universal_rate", self.universal_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(CorpusError::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }
}

const ADJECTIVES: &[&str] = &[
    "Acute", "Basal", "Cardiac", "Dorsal", "Early", "Fibrous", "Gastric", "Hepatic", "Immune", "Juvenile", "Kinetic",
    "Lateral", "Motor", "Neural", "Ocular", "Primary", "Renal", "Sensory", "Thermal", "Urban", "Viral", "Wild",
    "Aquatic", "Binary", "Coastal", "Digital", "Electric", "Formal", "Genetic", "Hybrid", "Linear", "Marine",
];

const NOUNS: &[&str] = &[
    "Cell", "Tissue", "Organ", "Process", "Agent", "Device", "Region", "Event", "Protein", "Gene", "Vessel", "Signal",
    "Disease", "Sample", "Species", "Habitat", "Course", "Student", "Method", "Measure", "Material", "Structure",
    "Function", "Pathway", "Receptor", "Segment", "Unit", "Layer", "Network", "Channel", "Factor", "Phase",
];

const VERBS: &[&str] = &[
    "partOf", "hasPart", "locatedIn", "regulates", "produces", "contains", "treats", "causes", "measures", "precedes",
    "teaches", "enrolledIn", "bindsTo", "derivesFrom", "adjacentTo", "participatesIn",
];

struct Draft {
    names: Vec<EntityName>,
    parent: Vec<Option<usize>>,
}

impl Draft {
    fn ancestors_or_self(&self, mut c: usize) -> Vec<usize> {
        let mut out = vec![c];
        while let Some(p) = self.parent[c] {
            out.push(p);
            c = p;
        }
        out
    }

    fn is_under(&self, c: usize, top: usize) -> bool {
        self.ancestors_or_self(c).contains(&top)
    }

    fn descendants_or_self(&self, top: usize) -> Vec<usize> {
        (0..self.names.len()).filter(|&c| self.is_under(c, top)).collect()
    }
}

fn in_range(rng: &mut ChaCha8Rng, (lo, hi): (usize, usize)) -> usize {
    rng.gen_range(lo..=hi)
}

fn draft_one(index: usize, cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Ontology {
    let n_c = in_range(rng, cfg.classes).min(ADJECTIVES.len() * NOUNS.len());
    let n_p = in_range(rng, cfg.properties).min(VERBS.len());
    let n_i = in_range(rng, cfg.individuals);

    let mut combos: Vec<(usize, usize)> =
        (0..ADJECTIVES.len()).flat_map(|a| (0..NOUNS.len()).map(move |n| (a, n))).collect();
    combos.shuffle(rng);
    let names: Vec<EntityName> =
        combos[..n_c].iter().map(|&(a, n)| EntityName::class(&format!("{}{}", ADJECTIVES[a], NOUNS[n]))).collect();
    let parent: Vec<Option<usize>> =
        (0..n_c).map(|j| if j == 0 || rng.gen_bool(0.1) { None } else { Some(rng.gen_range(0..j)) }).collect();
    let d = Draft { names, parent };
    let cls = |c: usize| ClassExpression::named(&d.names[c]);

    let mut axioms = Vec::new();
    for (j, p) in d.parent.iter().enumerate() {
        if let Some(p) = p {
            axioms.push(Axiom::sub_class(&d.names[j], cls(*p)));
        }
    }
    // sibling groups, roots included
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n_c + 1];
    for (j, p) in d.parent.iter().enumerate() {
        groups[p.map_or(n_c, |p| p)].push(j);
    }
    for g in &groups {
        for (x, &a) in g.iter().enumerate() {
            for &b in &g[x + 1..] {
                if rng.gen_bool(cfg.disjoint_density) {
                    axioms.push(Axiom::DisjointClasses(d.names[a].clone(), d.names[b].clone()));
                }
            }
        }
    }

    let mut verbs: Vec<&str> = VERBS.to_vec();
    verbs.shuffle(rng);
    let props: Vec<EntityName> = verbs[..n_p].iter().map(|v| EntityName::property(v)).collect();
    let mut domain = vec![0usize; n_p];
    let mut range = vec![0usize; n_p];
    for k in 0..n_p {
        if k > 0 && rng.gen_bool(0.3) {
            let q = rng.gen_range(0..k);
            domain[k] = domain[q];
            range[k] = range[q];
            axioms.push(Axiom::SubPropertyOf { sub: props[k].clone(), sup: props[q].clone() });
        } else {
            domain[k] = rng.gen_range(0..n_c);
            range[k] = rng.gen_range(0..n_c);
        }
        axioms.push(Axiom::Domain { property: props[k].clone(), class: d.names[domain[k]].clone() });
        axioms.push(Axiom::Range { property: props[k].clone(), class: d.names[range[k]].clone() });
    }

    for c in 0..n_c {
        let usable: Vec<usize> = (0..n_p).filter(|&k| d.is_under(c, domain[k])).collect();
        if usable.is_empty() {
            continue;
        }
        if rng.gen_bool(cfg.existential_rate) {
            let k = *usable.choose(rng).expect("non-empty");
            let fillers = d.descendants_or_self(range[k]);
            let f = *fillers.choose(rng).expect("range is its own descendant");
            axioms.push(Axiom::sub_class(&d.names[c], ClassExpression::some(RoleExpression::named(&props[k]), cls(f))));
        }
        if rng.gen_bool(cfg.universal_rate) {
            let k = *usable.choose(rng).expect("non-empty");
            let fillers = d.ancestors_or_self(range[k]);
            let f = *fillers.choose(rng).expect("range is its own ancestor");
            axioms.push(Axiom::sub_class(&d.names[c], ClassExpression::only(RoleExpression::named(&props[k]), cls(f))));
        }
    }

    let noun = NOUNS[index % NOUNS.len()].to_ascii_lowercase();
    let inds: Vec<(EntityName, usize)> =
        (0..n_i).map(|i| (EntityName::individual(&format!("{noun}{i}")), rng.gen_range(0..n_c))).collect();
    for (a, c) in &inds {
        axioms.push(Axiom::ClassAssertion { individual: a.clone(), class: cls(*c) });
    }
    for (a, c) in &inds {
        if !rng.gen_bool(0.5) {
            continue;
        }
        let usable: Vec<usize> = (0..n_p).filter(|&k| d.is_under(*c, domain[k])).collect();
        let Some(&k) = usable.choose(rng) else { continue };
        let objects: Vec<&EntityName> = inds.iter().filter(|(_, t)| d.is_under(*t, range[k])).map(|(b, _)| b).collect();
        if let Some(b) = objects.choose(rng) {
            axioms.push(Axiom::PropertyAssertion { property: props[k].clone(), subject: a.clone(), object: (*b).clone() });
        }
    }

    let mut seen = BTreeSet::new();
    axioms.retain(|a| seen.insert(a.clone()));
    Ontology::new(format!("synth_{index:04}"), axioms).with_declarations()
}

/// One generated ontology, verified ConsistentCoherent by the tableau.
pub fn generate_one(index: usize, cfg: &SynthConfig) -> Result<Ontology, CorpusError> {
    for attempt in 0..cfg.max_retries.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, ((index as u64) << 16) | attempt as u64));
        let o = draft_one(index, cfg, &mut rng);
        match classify_status(&o) {
            Ok(OntologyStatus::ConsistentCoherent) => return Ok(o),
            Ok(s) => log::warn!("{}: draft {attempt} is {}", o.id, s.label()),
            Err(e) => log::warn!("{}: draft {attempt} failed: {e}", o.id),
        }
    }
    Err(CorpusError::GenerationBudgetExceeded { index, attempts: cfg.max_retries.max(1) })
}

pub fn generate_synthetic(cfg: &SynthConfig) -> Result<Vec<Ontology>, CorpusError> {
    use rayon::prelude::*;
    cfg.validate()?;
    (0..cfg.n_ontologies).into_par_iter().map(|i| generate_one(i, cfg)).collect()
}
