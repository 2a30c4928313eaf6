//! Graph embeddings in the OWL2Vec* style: project the ontology onto a
//! labelled graph, walk it, add a lexical document, train skip-gram with
//! negative sampling and mean-pool per module.

mod sgns;
mod table;

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{Axiom, ClassExpression, EntityName, Ontology};

pub use sgns::{pair_loss_and_grad, train_skipgram, PairGrad, TrainConfig, TrainReport};
pub use table::{mean_pool, EmbeddingTable, Pooled};

pub const SUBCLASS_OF: &str = "subClassOf";
pub const TYPE_OF: &str = "type";
pub const DISJOINT_WITH: &str = "disjointWith";
pub const SUB_PROPERTY_OF: &str = "subPropertyOf";
pub const INVERSE_OF: &str = "inverseOf";

pub const DEFAULT_WALKS_PER_NODE: usize = 10;
pub const DEFAULT_WALK_DEPTH: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbedError {
    #[error("corpus has no token with count >= min_count")]
    EmptyVocabulary,
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("no token has a vector")]
    AllOOV,
    #[error("malformed embedding table: {0}")]
    Format(String),
}

/// Directed graph over local names with labelled edges.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProjectedGraph {
    pub nodes: Vec<String>,
    /// `(from, label, to)` by node index, sorted and deduplicated.
    pub edges: Vec<(usize, String, usize)>,
}

impl ProjectedGraph {
    pub fn edge_labels(&self, from: &str, to: &str) -> Vec<&str> {
        let (Some(f), Some(t)) = (self.index(from), self.index(to)) else {
            return vec![];
        };
        self.edges.iter().filter(|(a, _, b)| *a == f && *b == t).map(|(_, l, _)| l.as_str()).collect()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (k, (a, _, b)) in self.edges.iter().enumerate() {
            adj[*a].push((k, *b));
        }
        adj
    }

    /// Adds `subClassOf` edges for the transitive closure of the named
    /// hierarchy, standing in for reasoner-materialized triples.
    pub fn close_subclass(&mut self) {
        let n = self.nodes.len();
        let mut sup: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (a, l, b) in &self.edges {
            if l == SUBCLASS_OF && a != b {
                sup[*a].insert(*b);
            }
        }
        let mut added = BTreeSet::new();
        for start in 0..n {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<usize> = sup[start].iter().copied().collect();
            while let Some(x) = stack.pop() {
                if x != start && seen.insert(x) {
                    stack.extend(sup[x].iter().copied());
                }
            }
            for x in seen {
                added.insert((start, SUBCLASS_OF.to_string(), x));
            }
        }
        let mut all: BTreeSet<_> = self.edges.drain(..).collect();
        all.extend(added);
        self.edges = all.into_iter().collect();
    }
}

struct Builder {
    nodes: BTreeSet<String>,
    edges: BTreeSet<(String, String, String)>,
}

impl Builder {
    fn edge(&mut self, a: &EntityName, label: &str, b: &EntityName) {
        self.edges.insert((a.local().to_string(), label.to_string(), b.local().to_string()));
    }

    /// Edges from `from` to every named leaf of `e`; restrictions relabel
    /// with their property.
    fn leaves(&mut self, from: &EntityName, label: &str, e: &ClassExpression) {
        use ClassExpression as CE;
        match e {
            CE::Named(n) => self.edge(from, label, n),
            CE::And(v) | CE::Or(v) => v.iter().for_each(|x| self.leaves(from, label, x)),
            CE::Not(x) => self.leaves(from, DISJOINT_WITH, x),
            CE::Some(r, f) | CE::Only(r, f) | CE::AtMost(_, r, f) => {
                let l = r.property().local().to_string();
                self.leaves(from, &l, f)
            }
            CE::Top | CE::Bottom => {}
        }
    }
}

/// Projects axioms onto labelled edges. No closure is added; see
/// [`ProjectedGraph::close_subclass`].
pub fn project(o: &Ontology) -> ProjectedGraph {
    let mut b = Builder { nodes: o.signature().iter().map(|n| n.local().to_string()).collect(), edges: BTreeSet::new() };
    let mut domains: BTreeMap<EntityName, Vec<EntityName>> = BTreeMap::new();
    let mut ranges: BTreeMap<EntityName, Vec<EntityName>> = BTreeMap::new();
    for a in o.logical_axioms() {
        match a {
            Axiom::SubClassOf { sub, sup } => b.leaves(sub, SUBCLASS_OF, sup),
            Axiom::EquivalentClasses { class, expr } => {
                b.leaves(class, SUBCLASS_OF, expr);
                if let Some(n) = expr.as_named() {
                    b.edge(n, SUBCLASS_OF, class);
                }
            }
            Axiom::DisjointClasses(x, y) => b.edge(x, DISJOINT_WITH, y),
            Axiom::SubPropertyOf { sub, sup } => b.edge(sub, SUB_PROPERTY_OF, sup),
            Axiom::InverseProperties(p, q) => b.edge(p, INVERSE_OF, q),
            Axiom::Domain { property, class } => domains.entry(property.clone()).or_default().push(class.clone()),
            Axiom::Range { property, class } => ranges.entry(property.clone()).or_default().push(class.clone()),
            Axiom::ClassAssertion { individual, class } => b.leaves(individual, TYPE_OF, class),
            Axiom::PropertyAssertion { property, subject, object } => b.edge(subject, property.local(), object),
            Axiom::Declaration(_) => {}
        }
    }
    for (p, ds) in &domains {
        for d in ds {
            for r in ranges.get(p).into_iter().flatten() {
                b.edge(d, p.local(), r);
            }
        }
    }
    let nodes: Vec<String> = b.nodes.into_iter().collect();
    let idx = |s: &str| nodes.binary_search_by(|n| n.as_str().cmp(s)).expect("edge ends are signature names");
    let mut edges: Vec<(usize, String, usize)> = b.edges.iter().map(|(a, l, c)| (idx(a), l.clone(), idx(c))).collect();
    edges.sort();
    edges.dedup();
    ProjectedGraph { nodes, edges }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SentenceSource {
    Structure,
    Lexical,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WalkCorpus {
    pub sentences: Vec<(SentenceSource, Vec<String>)>,
}

impl WalkCorpus {
    pub fn tokens(&self) -> impl Iterator<Item = &String> {
        self.sentences.iter().flat_map(|(_, s)| s.iter())
    }

    pub fn extend(&mut self, other: WalkCorpus) {
        self.sentences.extend(other.sentences);
    }
}

/// SplitMix64 finalizer, used to derive independent per-node seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `walks_per_node` uniform walks of up to `depth` hops from every node,
/// written as node, label, node, ... and cut short at dead ends.
pub fn random_walks(g: &ProjectedGraph, depth: usize, walks_per_node: usize, seed: u64) -> WalkCorpus {
    assert!(depth >= 1, "walk depth must be at least 1");
    let adj = g.adjacency();
    let per_node: Vec<Vec<Vec<String>>> = (0..g.nodes.len())
        .into_par_iter()
        .map(|start| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, start as u64));
            (0..walks_per_node)
                .map(|_| {
                    let mut cur = start;
                    let mut s = vec![g.nodes[cur].clone()];
                    for _ in 0..depth {
                        let out = &adj[cur];
                        if out.is_empty() {
                            break;
                        }
                        let (k, next) = out[rng.gen_range(0..out.len())];
                        s.push(g.edges[k].1.clone());
                        s.push(g.nodes[next].clone());
                        cur = next;
                    }
                    s
                })
                .collect()
        })
        .collect();
    WalkCorpus {
        sentences: per_node.into_iter().flatten().map(|s| (SentenceSource::Structure, s)).collect(),
    }
}

/// Splits a local name on underscores, hyphens and camelCase boundaries.
pub fn split_words(name: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut cur = String::new();
    let chars: Vec<char> = name.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' || c == '-' || c == '.' || c.is_whitespace() {
            if !cur.is_empty() {
                words.push(std::mem::take(&mut cur));
            }
            continue;
        }
        let boundary = c.is_uppercase()
            && i > 0
            && (chars[i - 1].is_lowercase() || chars.get(i + 1).is_some_and(|n| n.is_lowercase()) && chars[i - 1].is_uppercase());
        if boundary && !cur.is_empty() {
            words.push(std::mem::take(&mut cur));
        }
        cur.extend(c.to_lowercase());
    }
    if !cur.is_empty() {
        words.push(cur);
    }
    words
}

/// One sentence per logical axiom: the words of every name it mentions, in
/// the order they appear.
pub fn lexical_corpus(o: &Ontology) -> WalkCorpus {
    let sentences = o
        .logical_axioms()
        .map(|a| {
            let mut words = Vec::new();
            a.for_each_name(&mut |n| words.extend(split_words(n.local())));
            (SentenceSource::Lexical, words)
        })
        .filter(|(_, w)| !w.is_empty())
        .collect();
    WalkCorpus { sentences }
}

/// Walk and lexical corpus with the closure edges added, using the default
/// walk shape.
pub fn module_corpus(o: &Ontology, seed: u64) -> WalkCorpus {
    let mut g = project(o);
    g.close_subclass();
    let mut c = random_walks(&g, DEFAULT_WALK_DEPTH, DEFAULT_WALKS_PER_NODE, seed);
    c.extend(lexical_corpus(o));
    c
}

/// Tokens a module is pooled over: local names of its signature.
pub fn module_tokens(o: &Ontology) -> Vec<String> {
    o.signature().iter().map(|n| n.local().to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: &str) -> EntityName {
        EntityName::class(n)
    }

    #[test]
    fn subclass_and_domain_range_edges() {
        let p = EntityName::property("teaches");
        let o = Ontology::new(
            "u",
            vec![
                Axiom::sub_class(&c("A"), ClassExpression::named(&c("B"))),
                Axiom::Domain { property: p.clone(), class: c("Professor") },
                Axiom::Range { property: p, class: c("Course") },
            ],
        );
        let g = project(&o);
        assert_eq!(g.edge_labels("A", "B"), vec![SUBCLASS_OF]);
        assert_eq!(g.edge_labels("Professor", "Course"), vec!["teaches"]);
        assert_eq!(project(&Ontology::default()), ProjectedGraph::default());
    }

    #[test]
    fn chain_walk_is_forced() {
        let o = Ontology::new(
            "c",
            vec![
                Axiom::sub_class(&c("A"), ClassExpression::named(&c("B"))),
                Axiom::sub_class(&c("B"), ClassExpression::named(&c("C"))),
            ],
        );
        let g = project(&o);
        let w = random_walks(&g, 2, 3, 9);
        let from_a: Vec<_> = w.sentences.iter().filter(|(_, s)| s[0] == "A").collect();
        assert_eq!(from_a.len(), 3);
        for (_, s) in from_a {
            assert_eq!(s, &["A", SUBCLASS_OF, "B", SUBCLASS_OF, "C"]);
        }
        assert!(w.sentences.iter().all(|(_, s)| s.len() <= 5));
        assert_eq!(w, random_walks(&g, 2, 3, 9));
        let mut closed = g.clone();
        closed.close_subclass();
        assert_eq!(closed.edge_labels("A", "C"), vec![SUBCLASS_OF]);
    }

    #[test]
    fn isolated_node_walks_have_length_one() {
        let o = Ontology::new("i", vec![Axiom::Declaration(c("Lone"))]);
        let w = random_walks(&project(&o), 4, 2, 0);
        assert_eq!(w.sentences.len(), 2);
        assert!(w.sentences.iter().all(|(_, s)| s.len() == 1));
    }

    #[test]
    fn word_splitting() {
        assert_eq!(split_words("enrolledIn"), ["enrolled", "in"]);
        assert_eq!(split_words("AICourse"), ["ai", "course"]);
        assert_eq!(split_words("has_part-of"), ["has", "part", "of"]);
    }
}
