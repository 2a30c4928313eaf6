//! Tableau reasoner for the supported fragment, with an exhaustive
//! finite-model oracle for cross-checking.
//!
//! The fragment is ALC with role hierarchy, inverse roles, unqualified
//! at-most restrictions, named disjointness, domain and range axioms and an
//! A-Box. Axioms with a named left-hand side are unfolded lazily; the reverse
//! half of a complex equivalence is internalized on every node. Termination
//! comes from anywhere pairwise blocking: a tree node is blocked by any earlier
//! open node with the same label, parent label and incoming edge.
//!
//! Results are deterministic: rules fire in a fixed priority, nodes are
//! visited in id order and label entries in interning order, which follows
//! the axiom order of the input.

mod engine;
mod kb;
pub mod oracle;
pub mod replay;
pub mod trace;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{Axiom, ClassExpression, EntityKind, EntityName, Ontology, OntologyStatus, RoleExpression};
use crate::semantics::{Interpretation, MAX_DOMAIN};
use engine::{Engine, Outcome};
use kb::Kb;

pub use oracle::{finite_model_search, oracle_status, OracleError};
pub use replay::{replay, ReplayError};
pub use trace::{ClashTrace, NodeId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableauError {
    #[error("unsupported axiom: {0}")]
    UnsupportedAxiom(String),
    #[error("unknown class {0}")]
    UnknownClass(String),
    #[error("rule budget of {steps} applications exceeded")]
    BudgetExceeded { steps: u64 },
    #[error("completion graph grew past {nodes} nodes")]
    ResourceLimit { nodes: usize },
}

#[derive(Clone, Debug)]
pub struct TableauConfig {
    pub max_nodes: usize,
    /// Rule applications per run, across all branches.
    pub max_steps: u64,
    /// Keep clash traces. Off makes refutations cheaper but leaves traces empty.
    pub record_trace: bool,
}

impl Default for TableauConfig {
    fn default() -> Self {
        TableauConfig {
            max_nodes: 20_000,
            max_steps: 5_000_000,
            record_trace: true,
        }
    }
}

impl TableauConfig {
    /// Default limits without trace recording.
    pub fn untraced() -> Self {
        TableauConfig { record_trace: false, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Blocking {
    Open,
    Direct(NodeId),
    Indirect,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchNode {
    pub id: NodeId,
    pub individuals: Vec<EntityName>,
    pub label: Vec<ClassExpression>,
    pub parent: Option<NodeId>,
    pub blocked: Blocking,
}

/// A clash-free, complete completion graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModelSketch {
    pub nodes: Vec<SketchNode>,
    pub edges: Vec<(NodeId, EntityName, NodeId)>,
}

impl ModelSketch {
    /// Named classes with an instance among the unblocked nodes.
    pub fn satisfiable_classes(&self) -> BTreeSet<EntityName> {
        self.nodes
            .iter()
            .filter(|n| n.blocked == Blocking::Open)
            .flat_map(|n| n.label.iter().filter_map(|e| e.as_named().cloned()))
            .collect()
    }

    /// Folds blocked nodes onto their blockers and reads the graph as an
    /// interpretation of `o`. Role edges are closed under the hierarchy.
    /// None if the graph has more than [`MAX_DOMAIN`] unblocked nodes.
    pub fn to_interpretation(&self, o: &Ontology) -> Option<Interpretation> {
        let open: Vec<&SketchNode> = self.nodes.iter().filter(|n| n.blocked == Blocking::Open).collect();
        if open.is_empty() || open.len() > MAX_DOMAIN {
            return None;
        }
        let index = |id: NodeId| -> Option<usize> {
            let node = self.nodes.iter().find(|n| n.id == id)?;
            let target = match node.blocked {
                Blocking::Open => id,
                Blocking::Direct(y) => y,
                Blocking::Indirect => return None,
            };
            open.iter().position(|n| n.id == target)
        };
        let mut interp = Interpretation::new(open.len());
        for (i, n) in open.iter().enumerate() {
            for e in &n.label {
                if let ClassExpression::Named(c) = e {
                    *interp.classes.entry(c.clone()).or_default() |= 1 << i;
                }
            }
            for ind in &n.individuals {
                interp.individuals.insert(ind.clone(), i);
            }
        }
        let hierarchy = replay::RoleHierarchy::new(o);
        let size = open.len();
        for (from, p, to) in &self.edges {
            let (Some(x), Some(y)) = (index(*from), index(*to)) else { continue };
            for sup in hierarchy.supers(&RoleExpression::named(p)) {
                let (a, b) = if sup.is_inverse() { (y, x) } else { (x, y) };
                let rows = interp.roles.entry(sup.property().clone()).or_insert_with(|| vec![0; size]);
                rows[a] |= 1 << b;
            }
        }
        Some(interp)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Model(ModelSketch),
    Clash(ClashTrace),
    /// A model of the ontology plus one refutation per unsatisfiable class.
    /// Each refutation is a trace for [`probe_ontology`] of that class.
    Incoherence { model: ModelSketch, refutations: Vec<(EntityName, ClashTrace)> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: OntologyStatus,
    pub witness: Witness,
}

/// The fresh individual used to test class satisfiability.
pub fn probe_individual() -> EntityName {
    EntityName::new(EntityKind::Individual, "urn:ontocheck:probe").expect("valid IRI")
}

/// `o` plus an assertion of `class` on a fresh individual, appended last.
pub fn probe_ontology(o: &Ontology, class: &EntityName) -> Ontology {
    let mut probed = o.clone();
    probed.axioms.push(Axiom::ClassAssertion {
        individual: probe_individual(),
        class: ClassExpression::named(class),
    });
    probed
}

pub fn check_consistency(o: &Ontology) -> Result<Verdict, TableauError> {
    check_consistency_with(o, &TableauConfig::default())
}

/// Decides consistency only; a consistent result is reported as
/// ConsistentCoherent without looking at class satisfiability.
pub fn check_consistency_with(o: &Ontology, cfg: &TableauConfig) -> Result<Verdict, TableauError> {
    let kb = Kb::compile(o)?;
    let mut engine = Engine::new(&kb, cfg);
    Ok(match engine.run(&[])? {
        Outcome::Open(st) => Verdict {
            status: OntologyStatus::ConsistentCoherent,
            witness: Witness::Model(engine.sketch(&st)),
        },
        Outcome::Closed { trace, reason } => Verdict {
            status: OntologyStatus::Inconsistent(reason),
            witness: Witness::Clash(trace),
        },
    })
}

/// Whether `c` can have an instance. The witness is a model with `c`
/// populated or a clash trace for [`probe_ontology`].
pub fn is_class_satisfiable(o: &Ontology, c: &EntityName) -> Result<(bool, Witness), TableauError> {
    is_class_satisfiable_with(o, c, &TableauConfig::default())
}

pub fn is_class_satisfiable_with(
    o: &Ontology,
    c: &EntityName,
    cfg: &TableauConfig,
) -> Result<(bool, Witness), TableauError> {
    let kb = Kb::compile(o)?;
    let class = kb.class_id(c).ok_or_else(|| TableauError::UnknownClass(c.iri().to_string()))?;
    let probed = kb.with_probe(&probe_individual(), class, o.axioms.len());
    let mut engine = Engine::new(&probed, cfg);
    Ok(match engine.run(&[])? {
        Outcome::Open(st) => (true, Witness::Model(engine.sketch(&st))),
        Outcome::Closed { trace, .. } => (false, Witness::Clash(trace)),
    })
}

pub fn classify_status(o: &Ontology) -> Result<OntologyStatus, TableauError> {
    classify_with(o, &TableauConfig::untraced()).map(|v| v.status)
}

pub fn classify(o: &Ontology) -> Result<Verdict, TableauError> {
    classify_with(o, &TableauConfig::default())
}

/// Full three-valued status. Classes seen in any clash-free model are
/// satisfiable; the rest are first probed together on separate anonymous
/// roots and, if that clashes, one by one.
pub fn classify_with(o: &Ontology, cfg: &TableauConfig) -> Result<Verdict, TableauError> {
    let mut kb = Kb::compile(o)?;
    let st = {
        let mut engine = Engine::new(&kb, cfg);
        match engine.run(&[])? {
            Outcome::Closed { trace, reason } => {
                return Ok(Verdict {
                    status: OntologyStatus::Inconsistent(reason),
                    witness: Witness::Clash(trace),
                })
            }
            Outcome::Open(st) => engine.sketch(&st),
        }
    };
    let model = st;
    let mut sat = model.satisfiable_classes();
    let pending: Vec<u32> = (0..kb.classes.len() as u32)
        .filter(|&c| !sat.contains(&kb.classes[c as usize]))
        .collect();
    if pending.is_empty() {
        return Ok(Verdict { status: OntologyStatus::ConsistentCoherent, witness: Witness::Model(model) });
    }
    let roots: Vec<u32> = pending.iter().map(|&c| kb.name_id(c)).collect();
    let batch_cfg = TableauConfig { record_trace: false, ..cfg.clone() };
    {
        let mut engine = Engine::new(&kb, &batch_cfg);
        if let Outcome::Open(st) = engine.run(&roots)? {
            let _ = st;
            return Ok(Verdict { status: OntologyStatus::ConsistentCoherent, witness: Witness::Model(model) });
        }
    }
    let probe = probe_individual();
    let mut refutations = Vec::new();
    for c in pending {
        let name = &kb.classes[c as usize];
        if sat.contains(name) {
            continue;
        }
        let probed = kb.with_probe(&probe, c, o.axioms.len());
        let mut engine = Engine::new(&probed, cfg);
        match engine.run(&[])? {
            Outcome::Open(st) => sat.extend(engine.sketch(&st).satisfiable_classes()),
            Outcome::Closed { trace, .. } => refutations.push((name.clone(), trace)),
        }
    }
    if refutations.is_empty() {
        return Ok(Verdict { status: OntologyStatus::ConsistentCoherent, witness: Witness::Model(model) });
    }
    Ok(Verdict {
        status: OntologyStatus::Incoherent(refutations.iter().map(|(c, _)| c.clone()).collect()),
        witness: Witness::Incoherence { model, refutations },
    })
}
