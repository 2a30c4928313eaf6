//! Topic-centric partitioning of an ontology into self-contained modules.
//!
//! Concepts are ranked by weighted degree, the best-ranked ones become
//! cluster heads, every other class joins the head it shares most edges with,
//! and each partition keeps exactly the axioms whose class and individual
//! signature it covers. Axioms spanning two partitions are dropped and
//! reported.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::model::{Axiom, ClassExpression, EntityKind, EntityName, Ontology};

pub const SUBCLASS_WEIGHT: f64 = 2.0;
pub const DOMAIN_RANGE_WEIGHT: f64 = 1.0;
pub const ASSERTION_WEIGHT: f64 = 1.0;
pub const DISJOINT_WEIGHT: f64 = 1.0;

/// Classes per module the default head count aims for.
pub const TARGET_MODULE_CLASSES: usize = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModularizeError {
    #[error("cannot pick {wanted} heads from {available} classes")]
    InsufficientConcepts { wanted: usize, available: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConceptScore {
    pub class: EntityName,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub head: EntityName,
    pub members: BTreeSet<EntityName>,
    pub individuals: BTreeSet<EntityName>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleResult {
    pub module: Ontology,
    pub source_id: String,
    pub head: EntityName,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Modularization {
    pub source: String,
    pub modules: Vec<ModuleResult>,
    pub dropped: Vec<Axiom>,
}

#[derive(Serialize)]
pub struct ManifestEntry {
    pub id: String,
    pub head: String,
    pub classes: usize,
    pub axioms: usize,
}

#[derive(Serialize)]
pub struct Manifest {
    pub source: String,
    pub modules: Vec<ManifestEntry>,
    pub dropped_axioms: usize,
}

impl Modularization {
    pub fn manifest(&self) -> Manifest {
        Manifest {
            source: self.source.clone(),
            modules: self
                .modules
                .iter()
                .map(|m| ManifestEntry {
                    id: m.module.id.clone(),
                    head: m.head.local().to_string(),
                    classes: m.module.classes().len(),
                    axioms: m.module.logical_axioms().count(),
                })
                .collect(),
            dropped_axioms: self.dropped.len(),
        }
    }
}

/// Undirected weighted multigraph over entity names.
struct DepGraph {
    adj: HashMap<EntityName, HashMap<EntityName, f64>>,
}

impl DepGraph {
    fn new(o: &Ontology) -> Self {
        let mut g = DepGraph { adj: HashMap::new() };
        for a in o.logical_axioms() {
            match a {
                Axiom::SubClassOf { sub, sup } => {
                    for c in sup.named_classes() {
                        g.add(sub, &c, SUBCLASS_WEIGHT);
                    }
                }
                Axiom::EquivalentClasses { class, expr } => {
                    for c in expr.named_classes() {
                        g.add(class, &c, SUBCLASS_WEIGHT);
                    }
                }
                Axiom::DisjointClasses(x, y) => g.add(x, y, DISJOINT_WEIGHT),
                Axiom::Domain { property, class } | Axiom::Range { property, class } => {
                    g.add(property, class, DOMAIN_RANGE_WEIGHT)
                }
                Axiom::ClassAssertion { individual, class } => {
                    for c in class.named_classes() {
                        g.add(individual, &c, ASSERTION_WEIGHT);
                    }
                }
                Axiom::PropertyAssertion { subject, object, .. } => g.add(subject, object, ASSERTION_WEIGHT),
                _ => {}
            }
        }
        g
    }

    fn add(&mut self, a: &EntityName, b: &EntityName, w: f64) {
        if a == b {
            // a self-loop counts once towards the degree
            *self.adj.entry(a.clone()).or_default().entry(b.clone()).or_default() += w;
            return;
        }
        *self.adj.entry(a.clone()).or_default().entry(b.clone()).or_default() += w;
        *self.adj.entry(b.clone()).or_default().entry(a.clone()).or_default() += w;
    }

    fn degree(&self, n: &EntityName) -> f64 {
        self.adj.get(n).map(|m| m.values().sum()).unwrap_or(0.0)
    }

    fn weight_into(&self, n: &EntityName, set: &BTreeSet<EntityName>) -> f64 {
        self.adj
            .get(n)
            .map(|m| m.iter().filter(|(k, _)| set.contains(*k)).map(|(_, w)| *w).sum())
            .unwrap_or(0.0)
    }
}

/// Classes by weighted degree, highest first, ties by name.
pub fn rank_concepts(o: &Ontology) -> Vec<ConceptScore> {
    let g = DepGraph::new(o);
    let mut out: Vec<ConceptScore> =
        o.classes().into_iter().map(|c| ConceptScore { score: g.degree(&c), class: c }).collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.class.cmp(&b.class)));
    out
}

fn direct_supers(o: &Ontology) -> HashMap<EntityName, BTreeSet<EntityName>> {
    let mut m: HashMap<EntityName, BTreeSet<EntityName>> = HashMap::new();
    for a in o.logical_axioms() {
        if let Axiom::SubClassOf { sub, sup: ClassExpression::Named(sup) } = a {
            m.entry(sub.clone()).or_default().insert(sup.clone());
        }
    }
    m
}

/// Top-`k` classes, skipping any that is a direct subclass or superclass of
/// an already chosen head. If that leaves fewer than `k`, the skipped classes
/// fill the gap in rank order.
pub fn select_heads(o: &Ontology, scores: &[ConceptScore], k: usize) -> Result<Vec<EntityName>, ModularizeError> {
    if k == 0 || k > scores.len() {
        return Err(ModularizeError::InsufficientConcepts { wanted: k, available: scores.len() });
    }
    let sup = direct_supers(o);
    let is_direct = |a: &EntityName, b: &EntityName| sup.get(a).is_some_and(|s| s.contains(b));
    let mut heads: Vec<EntityName> = Vec::new();
    let mut skipped = Vec::new();
    for s in scores {
        if heads.len() == k {
            break;
        }
        if heads.iter().any(|h| is_direct(&s.class, h) || is_direct(h, &s.class)) {
            skipped.push(s.class.clone());
        } else {
            heads.push(s.class.clone());
        }
    }
    let missing = k - heads.len();
    heads.extend(skipped.into_iter().take(missing));
    Ok(heads)
}

/// Assigns every class to exactly one head.
pub fn partition(o: &Ontology, heads: &[EntityName]) -> Vec<Partition> {
    assert!(!heads.is_empty(), "partition needs at least one head");
    let g = DepGraph::new(o);
    let sup = direct_supers(o);
    let mut owner: BTreeMap<EntityName, usize> = BTreeMap::new();
    for (i, h) in heads.iter().enumerate() {
        owner.entry(h.clone()).or_insert(i);
    }
    let classes = o.classes();
    // direct children, earliest-ranked head first
    for c in &classes {
        if owner.contains_key(c) {
            continue;
        }
        if let Some(i) = heads.iter().position(|h| sup.get(c).is_some_and(|s| s.contains(h))) {
            owner.insert(c.clone(), i);
        }
    }
    let mut members: Vec<BTreeSet<EntityName>> = vec![BTreeSet::new(); heads.len()];
    for (c, &i) in &owner {
        members[i].insert(c.clone());
    }
    // grow partitions in rounds until no class gains a positive membership
    loop {
        let mut moves = Vec::new();
        for c in classes.iter().filter(|c| !owner.contains_key(*c)) {
            let total = g.degree(c);
            let mut best: Option<(f64, usize)> = None;
            for (i, m) in members.iter().enumerate() {
                let score = g.weight_into(c, m) / (1.0 + total);
                if score > 0.0 && best.map_or(true, |(b, _)| score > b) {
                    best = Some((score, i));
                }
            }
            if let Some((_, i)) = best {
                moves.push((c.clone(), i));
            }
        }
        if moves.is_empty() {
            break;
        }
        for (c, i) in moves {
            members[i].insert(c.clone());
            owner.insert(c, i);
        }
    }
    for c in &classes {
        if !owner.contains_key(c) {
            members[0].insert(c.clone());
            owner.insert(c.clone(), 0);
        }
    }
    let mut individuals: Vec<BTreeSet<EntityName>> = vec![BTreeSet::new(); heads.len()];
    let mut placed: BTreeSet<EntityName> = BTreeSet::new();
    for a in o.logical_axioms() {
        if let Axiom::ClassAssertion { individual, class } = a {
            if placed.contains(individual) {
                continue;
            }
            if let Some(i) = class.named_classes().first().and_then(|c| owner.get(c)) {
                individuals[*i].insert(individual.clone());
                placed.insert(individual.clone());
            }
        }
    }
    for i in o.individuals() {
        if !placed.contains(&i) {
            individuals[0].insert(i);
        }
    }
    heads
        .iter()
        .zip(members.into_iter().zip(individuals))
        .map(|(h, (members, individuals))| Partition { head: h.clone(), members, individuals })
        .collect()
}

fn anchored_names(a: &Axiom) -> BTreeSet<EntityName> {
    a.names().into_iter().filter(|n| n.kind() != EntityKind::ObjectProperty).collect()
}

/// One module per partition. An axiom goes where its classes and individuals
/// all live; property-only axioms go to every module using one of their
/// properties, or to the first module if none does.
pub fn extract_modules(o: &Ontology, parts: &[Partition]) -> Modularization {
    let mut bodies: Vec<Vec<Axiom>> = vec![Vec::new(); parts.len()];
    let mut dropped = Vec::new();
    let mut property_only = Vec::new();
    for a in &o.axioms {
        let names = anchored_names(a);
        if names.is_empty() {
            property_only.push(a);
            continue;
        }
        let home = parts
            .iter()
            .position(|p| names.iter().all(|n| p.members.contains(n) || p.individuals.contains(n)));
        match home {
            Some(i) => bodies[i].push(a.clone()),
            None if a.is_declaration() => {}
            None => dropped.push(a.clone()),
        }
    }
    let used: Vec<BTreeSet<EntityName>> = bodies
        .iter()
        .map(|b| b.iter().flat_map(|a| a.names()).filter(|n| n.kind() == EntityKind::ObjectProperty).collect())
        .collect();
    for a in property_only {
        let props = a.names();
        let mut placed = false;
        for (i, u) in used.iter().enumerate() {
            if props.iter().any(|p| u.contains(p)) {
                bodies[i].push(a.clone());
                placed = true;
            }
        }
        if !placed && !bodies.is_empty() {
            bodies[0].push(a.clone());
        }
    }
    let modules = bodies
        .into_iter()
        .zip(parts)
        .enumerate()
        .map(|(i, (axioms, p))| {
            let mut module = Ontology::new(format!("{}_m{}", o.id, i), axioms);
            // every member class is declared even when no axiom mentions it
            let have = module.signature();
            for c in &p.members {
                if !have.contains(c) {
                    module.axioms.push(Axiom::Declaration(c.clone()));
                }
            }
            ModuleResult { module: module.with_declarations(), source_id: o.id.clone(), head: p.head.clone() }
        })
        .collect();
    Modularization { source: o.id.clone(), modules, dropped }
}

pub fn default_k(o: &Ontology) -> usize {
    o.classes().len().div_ceil(TARGET_MODULE_CLASSES).max(1)
}

/// Rank, pick heads, partition and extract in one go.
pub fn modularize(o: &Ontology, k: Option<usize>) -> Result<Modularization, ModularizeError> {
    let k = k.unwrap_or_else(|| default_k(o));
    let scores = rank_concepts(o);
    let heads = select_heads(o, &scores, k)?;
    Ok(extract_modules(o, &partition(o, &heads)))
}
