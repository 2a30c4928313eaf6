//! Clash traces: the rule applications that close every branch.

use std::fmt;

use serde_json::{json, Value};

use crate::model::{ClassExpression, EntityName, RoleExpression};

pub type NodeId = u32;

/// Why a derived expression was added to a node label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// `of` is a conjunction in the same label.
    Conjunct { of: ClassExpression },
    /// Lazy unfolding of a named class through axiom `axiom`.
    Unfold { axiom: usize, from: ClassExpression },
    /// Internalized half of an equivalence, added everywhere.
    Global { axiom: usize },
    /// `source` is a universal restriction on `from`, which reaches the node over `via`.
    Forall { from: NodeId, via: RoleExpression, source: ClassExpression },
    /// The node has an outgoing edge `via` to `neighbour`.
    Domain { axiom: usize, neighbour: NodeId, via: RoleExpression },
    /// The node reaches `neighbour` over `via`, an inverse of the ranged property.
    Range { axiom: usize, neighbour: NodeId, via: RoleExpression },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClashKind {
    Complement(EntityName),
    Bottom,
    AtMostZero { restriction: ClassExpression, neighbour: NodeId, via: RoleExpression },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    /// Anonymous root node.
    Root { node: NodeId },
    /// `individual` lives at `node` and has `expr` by assertion `axiom`.
    Assert { node: NodeId, individual: EntityName, axiom: usize, expr: ClassExpression },
    /// Property assertion `axiom` links two individual nodes.
    Link { from: NodeId, to: NodeId, subject: EntityName, object: EntityName, axiom: usize },
    Derive { node: NodeId, expr: ClassExpression, rule: Rule },
    /// A fresh successor for the existential `source` of `parent`.
    Spawn { parent: NodeId, child: NodeId, source: ClassExpression },
    Clash { node: NodeId, kind: ClashKind },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BranchOn {
    Disjunction(ClassExpression),
    /// `neighbours` are the first n+1 neighbours counted by the restriction.
    AtMost { restriction: ClassExpression, neighbours: Vec<NodeId> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Choice {
    Disjunct(ClassExpression),
    Merge { from: NodeId, into: NodeId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub node: NodeId,
    pub on: BranchOn,
    pub arms: Vec<(Choice, ClashTrace)>,
}

/// A refutation tree. Without a branch the last step is a clash; with one,
/// every arm is itself a refutation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClashTrace {
    pub steps: Vec<Step>,
    pub branch: Option<Box<Branch>>,
}

impl ClashTrace {
    /// Number of steps over the whole tree.
    pub fn len(&self) -> usize {
        self.steps.len()
            + self
                .branch
                .as_ref()
                .map_or(0, |b| b.arms.iter().map(|(_, t)| 1 + t.len()).sum())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_json(&self) -> Value {
        let steps: Vec<Value> = self.steps.iter().map(|s| Value::String(s.to_string())).collect();
        match &self.branch {
            None => json!({ "steps": steps }),
            Some(b) => {
                let on = match &b.on {
                    BranchOn::Disjunction(e) => format!("node {} chooses a disjunct of {e}", b.node),
                    BranchOn::AtMost { restriction, neighbours } => {
                        format!("node {} has {:?} under {restriction}", b.node, neighbours)
                    }
                };
                let arms: Vec<Value> = b
                    .arms
                    .iter()
                    .map(|(c, t)| json!({ "choice": c.to_string(), "trace": t.to_json() }))
                    .collect();
                json!({ "steps": steps, "branch": { "on": on, "arms": arms } })
            }
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Conjunct { of } => write!(f, "conjunct of {of}"),
            Rule::Unfold { axiom, from } => write!(f, "unfolding {from} by axiom {axiom}"),
            Rule::Global { axiom } => write!(f, "global by axiom {axiom}"),
            Rule::Forall { from, via, source } => write!(f, "{source} at node {from} over {via}"),
            Rule::Domain { axiom, neighbour, via } => {
                write!(f, "domain axiom {axiom}, edge {via} to node {neighbour}")
            }
            Rule::Range { axiom, neighbour, via } => {
                write!(f, "range axiom {axiom}, edge {via} to node {neighbour}")
            }
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Root { node } => write!(f, "root node {node}"),
            Step::Assert { node, individual, axiom, expr } => {
                write!(f, "node {node} is {individual}: {expr} (axiom {axiom})")
            }
            Step::Link { from, to, subject, object, axiom } => {
                write!(f, "edge {subject} -> {object} between nodes {from} and {to} (axiom {axiom})")
            }
            Step::Derive { node, expr, rule } => write!(f, "node {node} gets {expr} ({rule})"),
            Step::Spawn { parent, child, source } => {
                write!(f, "node {parent} spawns node {child} for {source}")
            }
            Step::Clash { node, kind } => match kind {
                ClashKind::Complement(c) => write!(f, "clash at node {node}: {c} and not {c}"),
                ClashKind::Bottom => write!(f, "clash at node {node}: owl:Nothing"),
                ClashKind::AtMostZero { restriction, neighbour, via } => {
                    write!(f, "clash at node {node}: {restriction} but {via} edge to node {neighbour}")
                }
            },
        }
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Choice::Disjunct(e) => write!(f, "take {e}"),
            Choice::Merge { from, into } => write!(f, "merge node {from} into node {into}"),
        }
    }
}
