//! English triples, plain text and Levi graphs for modules.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::antipattern::AntiPatternId;
use crate::model::{Axiom, ClassExpression, EntityKind, EntityName, Ontology, RoleExpression};

pub const DEFAULT_TOKEN_BUDGET: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub relation: String,
    pub object: String,
}

impl Triple {
    pub fn new(subject: impl Into<String>, relation: impl Into<String>, object: impl Into<String>) -> Self {
        Triple { subject: subject.into(), relation: relation.into(), object: object.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Consistent,
    Inconsistent,
}

impl Label {
    pub fn as_int(self) -> u8 {
        match self {
            Label::Consistent => 0,
            Label::Inconsistent => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleDoc {
    pub id: String,
    pub triples: Vec<Triple>,
    pub token_count: usize,
    pub label: Option<Label>,
    pub pattern: Option<AntiPatternId>,
}

/// Counts tokens of a triple list. Implementations must be monotone: adding
/// a triple never lowers the count.
pub trait TokenEstimator {
    fn estimate(&self, triples: &[Triple]) -> usize;
}

/// Whitespace words plus two separator tokens per triple.
#[derive(Clone, Copy, Debug, Default)]
pub struct WordCount;

impl TokenEstimator for WordCount {
    fn estimate(&self, triples: &[Triple]) -> usize {
        triples
            .iter()
            .map(|t| {
                t.subject.split_whitespace().count()
                    + t.relation.split_whitespace().count()
                    + t.object.split_whitespace().count()
                    + 2
            })
            .sum()
    }
}

pub fn render_role(r: &RoleExpression) -> String {
    match r {
        RoleExpression::Named(p) => p.local().to_string(),
        RoleExpression::Inverse(p) => format!("inverse {}", p.local()),
    }
}

/// English phrase for a class expression; nested compound operands are
/// parenthesized.
pub fn render(c: &ClassExpression) -> String {
    use ClassExpression as CE;
    let operand = |x: &CE| {
        if x.is_atomic() || matches!(x, CE::Not(_)) {
            render(x)
        } else {
            format!("({})", render(x))
        }
    };
    match c {
        CE::Named(n) => n.local().to_string(),
        CE::Top => "Thing".into(),
        CE::Bottom => "Nothing".into(),
        CE::Not(x) => format!("not {}", operand(x)),
        CE::And(v) => v.iter().map(operand).collect::<Vec<_>>().join(" and "),
        CE::Or(v) => v.iter().map(operand).collect::<Vec<_>>().join(" or "),
        CE::Some(r, f) => format!("some {} {}", render_role(r), operand(f)),
        CE::Only(r, f) => format!("only {} {}", render_role(r), operand(f)),
        CE::AtMost(n, r, f) if **f == CE::Top => format!("at most {} {}", n, render_role(r)),
        CE::AtMost(n, r, f) => format!("at most {} {} {}", n, render_role(r), operand(f)),
    }
}

fn kind_word(k: EntityKind) -> &'static str {
    match k {
        EntityKind::Class => "class",
        EntityKind::ObjectProperty => "property",
        EntityKind::Individual => "individual",
    }
}

pub fn axiom_triple(a: &Axiom) -> Triple {
    let l = |n: &EntityName| n.local().to_string();
    match a {
        Axiom::Declaration(n) => Triple::new(l(n), "is a", kind_word(n.kind())),
        Axiom::SubClassOf { sub, sup } => Triple::new(l(sub), "is a subclass of", render(sup)),
        Axiom::EquivalentClasses { class, expr } => Triple::new(l(class), "is equivalent to", render(expr)),
        Axiom::DisjointClasses(x, y) => Triple::new(l(x), "is disjoint with", l(y)),
        Axiom::SubPropertyOf { sub, sup } => Triple::new(l(sub), "is a subproperty of", l(sup)),
        Axiom::InverseProperties(p, q) => Triple::new(l(p), "is the inverse of", l(q)),
        Axiom::Domain { property, class } => Triple::new(l(property), "has domain", l(class)),
        Axiom::Range { property, class } => Triple::new(l(property), "has range", l(class)),
        Axiom::ClassAssertion { individual, class } => Triple::new(l(individual), "has class", render(class)),
        Axiom::PropertyAssertion { property, subject, object } => Triple::new(l(subject), l(property), l(object)),
    }
}

pub fn to_triples(o: &Ontology) -> TripleDoc {
    to_triples_with(o, &WordCount)
}

pub fn to_triples_with(o: &Ontology, est: &dyn TokenEstimator) -> TripleDoc {
    let triples: Vec<Triple> = o.axioms.iter().map(axiom_triple).collect();
    TripleDoc { id: o.id.clone(), token_count: est.estimate(&triples), triples, label: None, pattern: None }
}

pub fn estimate_tokens(doc: &TripleDoc) -> usize {
    WordCount.estimate(&doc.triples)
}

/// Keeps documents within `budget`; returns them and the number excluded.
pub fn filter_by_budget(docs: Vec<TripleDoc>, budget: usize) -> (Vec<TripleDoc>, usize) {
    let before = docs.len();
    let kept: Vec<TripleDoc> = docs.into_iter().filter(|d| d.token_count <= budget).collect();
    let excluded = before - kept.len();
    (kept, excluded)
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

pub fn to_text(doc: &TripleDoc) -> String {
    doc.triples
        .iter()
        .map(|t| format!("{} {} {}.", capitalize(&t.subject), t.relation, t.object))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeviGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
}

/// Each triple becomes `s -> r#k -> o` with a fresh relation node.
pub fn to_levi(doc: &TripleDoc) -> LeviGraph {
    let mut g = LeviGraph::default();
    let mut seen: HashSet<String> = HashSet::new();
    let mut entity = |g: &mut LeviGraph, n: &str| {
        if seen.insert(n.to_string()) {
            g.nodes.push(n.to_string());
        }
    };
    for (k, t) in doc.triples.iter().enumerate() {
        entity(&mut g, &t.subject);
        let rel = format!("{}#{}", t.relation, k);
        g.nodes.push(rel.clone());
        entity(&mut g, &t.object);
        g.edges.push((t.subject.clone(), rel.clone()));
        g.edges.push((rel, t.object.clone()));
    }
    g
}

/// One line of the triples JSONL export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleRecord {
    pub id: String,
    pub triples: Vec<[String; 3]>,
    pub text: String,
    pub tokens: usize,
    pub label: Option<Label>,
    pub pattern: Option<String>,
}

impl From<&TripleDoc> for TripleRecord {
    fn from(d: &TripleDoc) -> Self {
        TripleRecord {
            id: d.id.clone(),
            triples: d.triples.iter().map(|t| [t.subject.clone(), t.relation.clone(), t.object.clone()]).collect(),
            text: to_text(d),
            tokens: d.token_count,
            label: d.label,
            pattern: d.pattern.map(|p| p.name().to_string()),
        }
    }
}
