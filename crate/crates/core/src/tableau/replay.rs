//! Independent replay of clash traces against the source ontology.
//!
//! The checker shares no code with the engine: it recomputes the role
//! hierarchy from the axioms, keeps its own labels and edges over plain
//! class expressions, and tracks merges with a union-find. Every step must be
//! justified by an axiom or by what is already in the graph, every leaf must
//! end in a clash and every branch must cover all alternatives.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use thiserror::Error;

use super::trace::{BranchOn, Choice, ClashKind, ClashTrace, NodeId, Rule, Step};
use crate::model::{nnf, Axiom, ClassExpression, EntityName, Ontology, RoleExpression};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{at}: {reason}")]
pub struct ReplayError {
    pub at: String,
    pub reason: String,
}

/// Sub-role relation over role expressions, closed reflexively and transitively.
#[derive(Clone, Debug, Default)]
pub struct RoleHierarchy {
    direct: HashMap<RoleExpression, Vec<RoleExpression>>,
}

impl RoleHierarchy {
    pub fn new(o: &Ontology) -> Self {
        let mut direct: HashMap<RoleExpression, Vec<RoleExpression>> = HashMap::new();
        let mut add = |a: RoleExpression, b: RoleExpression| direct.entry(a).or_default().push(b);
        for axiom in &o.axioms {
            match axiom {
                Axiom::SubPropertyOf { sub, sup } => {
                    add(RoleExpression::named(sub), RoleExpression::named(sup));
                    add(RoleExpression::Inverse(sub.clone()), RoleExpression::Inverse(sup.clone()));
                }
                Axiom::InverseProperties(p, q) => {
                    let (p, q) = (RoleExpression::named(p), RoleExpression::named(q));
                    add(p.clone(), q.inverse());
                    add(q.inverse(), p.clone());
                    add(q.clone(), p.inverse());
                    add(p.inverse(), q);
                }
                _ => {}
            }
        }
        RoleHierarchy { direct }
    }

    /// `r` and everything above it, in breadth-first order.
    pub fn supers(&self, r: &RoleExpression) -> Vec<RoleExpression> {
        let mut seen = vec![r.clone()];
        let mut queue = VecDeque::from([r.clone()]);
        while let Some(x) = queue.pop_front() {
            for y in self.direct.get(&x).into_iter().flatten() {
                if !seen.contains(y) {
                    seen.push(y.clone());
                    queue.push_back(y.clone());
                }
            }
        }
        seen
    }

    pub fn is_sub(&self, r: &RoleExpression, s: &RoleExpression) -> bool {
        r == s || self.supers(r).contains(s)
    }
}

#[derive(Clone)]
struct Graph {
    nodes: BTreeSet<NodeId>,
    rep: HashMap<NodeId, NodeId>,
    labels: HashMap<NodeId, HashSet<ClassExpression>>,
    edges: Vec<(NodeId, RoleExpression, NodeId)>,
    individuals: HashMap<EntityName, NodeId>,
}

impl Graph {
    fn find(&self, mut x: NodeId) -> NodeId {
        while let Some(&p) = self.rep.get(&x) {
            x = p;
        }
        x
    }

    fn has(&self, x: NodeId, e: &ClassExpression) -> bool {
        self.labels.get(&self.find(x)).map_or(false, |l| l.contains(e))
    }

    fn add(&mut self, x: NodeId, e: ClassExpression) {
        let r = self.find(x);
        self.labels.entry(r).or_default().insert(e);
    }

    fn union(&mut self, from: NodeId, into: NodeId) {
        let (a, b) = (self.find(from), self.find(into));
        if a == b {
            return;
        }
        self.rep.insert(a, b);
        let moved = self.labels.remove(&a).unwrap_or_default();
        self.labels.entry(b).or_default().extend(moved);
    }

    /// Roles `r` such that `x` has an `r`-edge to `y`, seen from `x`.
    fn roles_between(&self, x: NodeId, y: NodeId) -> Vec<RoleExpression> {
        let (x, y) = (self.find(x), self.find(y));
        let mut out = Vec::new();
        for (a, r, b) in &self.edges {
            let (a, b) = (self.find(*a), self.find(*b));
            if a == x && b == y {
                out.push(r.clone());
            }
            if a == y && b == x {
                out.push(r.inverse());
            }
        }
        out
    }
}

struct Checker<'o> {
    o: &'o Ontology,
    roles: RoleHierarchy,
}

pub fn replay(o: &Ontology, trace: &ClashTrace) -> Result<(), ReplayError> {
    let checker = Checker { o, roles: RoleHierarchy::new(o) };
    let graph = Graph {
        nodes: BTreeSet::new(),
        rep: HashMap::new(),
        labels: HashMap::new(),
        edges: Vec::new(),
        individuals: HashMap::new(),
    };
    checker.trace(graph, trace, "trace")
}

fn fail<T>(at: &str, reason: impl Into<String>) -> Result<T, ReplayError> {
    Err(ReplayError { at: at.to_string(), reason: reason.into() })
}

impl Checker<'_> {
    fn axiom(&self, at: &str, i: usize) -> Result<&Axiom, ReplayError> {
        match self.o.axioms.get(i) {
            Some(a) => Ok(a),
            None => fail(at, format!("no axiom {i}")),
        }
    }

    fn trace(&self, mut g: Graph, t: &ClashTrace, path: &str) -> Result<(), ReplayError> {
        let mut closed = false;
        for (i, step) in t.steps.iter().enumerate() {
            let at = format!("{path} step {i}");
            if closed {
                return fail(&at, "step after a clash");
            }
            closed = self.step(&mut g, step, &at)?;
        }
        match &t.branch {
            None if closed => Ok(()),
            None => fail(path, "leaf does not end in a clash"),
            Some(_) if closed => fail(path, "branch after a clash"),
            Some(b) => {
                let at = format!("{path} branch");
                if !g.nodes.contains(&b.node) {
                    return fail(&at, "unknown node");
                }
                match &b.on {
                    BranchOn::Disjunction(e) => {
                        let ClassExpression::Or(ds) = e else { return fail(&at, "not a disjunction") };
                        if !g.has(b.node, e) {
                            return fail(&at, "disjunction not in label");
                        }
                        let choices: Vec<Choice> = ds.iter().cloned().map(Choice::Disjunct).collect();
                        if b.arms.len() != choices.len() || b.arms.iter().zip(&choices).any(|((c, _), d)| c != d) {
                            return fail(&at, "arms do not cover the disjuncts in order");
                        }
                        for (k, (_, arm)) in b.arms.iter().enumerate() {
                            let mut g2 = g.clone();
                            g2.add(b.node, ds[k].clone());
                            self.trace(g2, arm, &format!("{path} arm {k}"))?;
                        }
                        Ok(())
                    }
                    BranchOn::AtMost { restriction, neighbours } => {
                        let ClassExpression::AtMost(n, s, filler) = restriction else {
                            return fail(&at, "not an at-most restriction");
                        };
                        if !g.has(b.node, restriction) {
                            return fail(&at, "restriction not in label");
                        }
                        if neighbours.len() != *n as usize + 1 {
                            return fail(&at, "wrong number of neighbours");
                        }
                        let reps: BTreeSet<NodeId> = neighbours.iter().map(|&y| g.find(y)).collect();
                        if reps.len() != neighbours.len() {
                            return fail(&at, "neighbours are not distinct");
                        }
                        for &y in neighbours {
                            let counted = g.roles_between(b.node, y).iter().any(|r| self.roles.is_sub(r, s))
                                && (**filler == ClassExpression::Top || g.has(y, filler));
                            if !counted {
                                return fail(&at, format!("node {y} is not counted by {restriction}"));
                            }
                        }
                        let mut pairs = Vec::new();
                        for i in 0..neighbours.len() {
                            for j in i + 1..neighbours.len() {
                                pairs.push((neighbours[i], neighbours[j]));
                            }
                        }
                        if b.arms.len() != pairs.len() {
                            return fail(&at, "arms do not cover every pair");
                        }
                        for (k, ((choice, arm), (y, z))) in b.arms.iter().zip(pairs).enumerate() {
                            let Choice::Merge { from, into } = choice else {
                                return fail(&at, "expected a merge");
                            };
                            if !((*from == y && *into == z) || (*from == z && *into == y)) {
                                return fail(&at, format!("arm {k} merges the wrong pair"));
                            }
                            let mut g2 = g.clone();
                            g2.union(*from, *into);
                            self.trace(g2, arm, &format!("{path} arm {k}"))?;
                        }
                        Ok(())
                    }
                }
            }
        }
    }

    fn bind(&self, g: &mut Graph, at: &str, ind: &EntityName, node: NodeId) -> Result<(), ReplayError> {
        match g.individuals.get(ind) {
            Some(&bound) if g.find(bound) == g.find(node) => Ok(()),
            Some(_) => fail(at, format!("{ind} is bound to another node")),
            None if g.nodes.contains(&node) => fail(at, format!("node {node} already exists")),
            None => {
                g.nodes.insert(node);
                g.individuals.insert(ind.clone(), node);
                Ok(())
            }
        }
    }

    /// Applies one step; true when the step is a valid clash.
    fn step(&self, g: &mut Graph, step: &Step, at: &str) -> Result<bool, ReplayError> {
        match step {
            Step::Root { node } => {
                if !g.nodes.insert(*node) {
                    return fail(at, "root node already exists");
                }
            }
            Step::Assert { node, individual, axiom, expr } => {
                match self.axiom(at, *axiom)? {
                    Axiom::ClassAssertion { individual: i, class } if i == individual && nnf(class) == *expr => {}
                    _ => return fail(at, "assertion does not match its axiom"),
                }
                self.bind(g, at, individual, *node)?;
                g.add(*node, expr.clone());
            }
            Step::Link { from, to, subject, object, axiom } => {
                let Axiom::PropertyAssertion { property, subject: s, object: o } = self.axiom(at, *axiom)? else {
                    return fail(at, "not a property assertion");
                };
                if s != subject || o != object {
                    return fail(at, "link does not match its axiom");
                }
                self.bind(g, at, subject, *from)?;
                self.bind(g, at, object, *to)?;
                g.edges.push((*from, RoleExpression::named(property), *to));
            }
            Step::Spawn { parent, child, source } => {
                let ClassExpression::Some(r, filler) = source else { return fail(at, "not an existential") };
                if !g.nodes.contains(parent) || !g.has(*parent, source) {
                    return fail(at, "existential not in parent label");
                }
                if !g.nodes.insert(*child) {
                    return fail(at, "child node already exists");
                }
                g.edges.push((*parent, r.clone(), *child));
                g.add(*child, (**filler).clone());
            }
            Step::Derive { node, expr, rule } => {
                if !g.nodes.contains(node) {
                    return fail(at, "unknown node");
                }
                self.derive(g, *node, expr, rule, at)?;
                g.add(*node, expr.clone());
            }
            Step::Clash { node, kind } => {
                if !g.nodes.contains(node) {
                    return fail(at, "unknown node");
                }
                let ok = match kind {
                    ClashKind::Complement(c) => {
                        let named = ClassExpression::named(c);
                        g.has(*node, &named) && g.has(*node, &ClassExpression::not(named))
                    }
                    ClashKind::Bottom => g.has(*node, &ClassExpression::Bottom),
                    ClashKind::AtMostZero { restriction, neighbour, via } => match restriction {
                        ClassExpression::AtMost(0, s, filler) => {
                            g.has(*node, restriction)
                                && g.roles_between(*node, *neighbour).contains(via)
                                && self.roles.is_sub(via, s)
                                && (**filler == ClassExpression::Top || g.has(*neighbour, filler))
                        }
                        _ => false,
                    },
                };
                if !ok {
                    return fail(at, format!("not a clash: {step}"));
                }
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn derive(&self, g: &Graph, node: NodeId, expr: &ClassExpression, rule: &Rule, at: &str) -> Result<(), ReplayError> {
        use ClassExpression as CE;
        let ok = match rule {
            Rule::Conjunct { of } => g.has(node, of) && matches!(of, CE::And(es) if es.contains(expr)),
            Rule::Unfold { axiom, from } => {
                g.has(node, from)
                    && match self.axiom(at, *axiom)? {
                        Axiom::SubClassOf { sub, sup } => from.as_named() == Some(sub) && nnf(sup) == *expr,
                        Axiom::EquivalentClasses { class, expr: d } => {
                            (from.as_named() == Some(class) && nnf(d) == *expr)
                                || (d.as_named().is_some() && from == d && expr.as_named() == Some(class))
                        }
                        Axiom::DisjointClasses(a, b) => {
                            (from.as_named() == Some(a) && *expr == CE::not(CE::named(b)))
                                || (from.as_named() == Some(b) && *expr == CE::not(CE::named(a)))
                        }
                        _ => false,
                    }
            }
            Rule::Global { axiom } => match self.axiom(at, *axiom)? {
                Axiom::EquivalentClasses { class, expr: d } if d.as_named().is_none() => {
                    *expr == nnf(&CE::Or(vec![CE::not(d.clone()), CE::named(class)]))
                }
                _ => false,
            },
            Rule::Forall { from, via, source } => match source {
                CE::Only(s, filler) => {
                    g.has(*from, source)
                        && **filler == *expr
                        && g.roles_between(*from, node).contains(via)
                        && self.roles.is_sub(via, s)
                }
                _ => false,
            },
            Rule::Domain { axiom, neighbour, via } => match self.axiom(at, *axiom)? {
                Axiom::Domain { property, class } => {
                    expr.as_named() == Some(class)
                        && g.roles_between(node, *neighbour).contains(via)
                        && self.roles.is_sub(via, &RoleExpression::named(property))
                }
                _ => false,
            },
            Rule::Range { axiom, neighbour, via } => match self.axiom(at, *axiom)? {
                Axiom::Range { property, class } => {
                    expr.as_named() == Some(class)
                        && g.roles_between(node, *neighbour).contains(via)
                        && self.roles.is_sub(via, &RoleExpression::Inverse(property.clone()))
                }
                _ => false,
            },
        };
        if ok {
            Ok(())
        } else {
            fail(at, format!("unjustified derivation of {expr} at node {node} ({rule})"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manchester::parse;
    use crate::tableau::{check_consistency, Witness};

    fn clash_of(text: &str) -> (Ontology, ClashTrace) {
        let o = parse(text).unwrap();
        let Witness::Clash(t) = check_consistency(&o).unwrap().witness else { panic!("consistent") };
        (o, t)
    }

    #[test]
    fn tampered_traces_are_rejected() {
        let (o, mut t) = clash_of("Individual: a\n Types: A, not A");
        replay(&o, &t).unwrap();
        t.steps.pop();
        assert!(replay(&o, &t).is_err());
    }

    #[test]
    fn derivations_must_match_axioms() {
        let (o, t) = clash_of("Class: A\n SubClassOf: B\nClass: B\n DisjointWith: A\nIndividual: a\n Types: A");
        replay(&o, &t).unwrap();
        // the same trace against an ontology without the subclass axiom fails
        let weaker = Ontology::new(o.id.clone(), o.axioms.iter().filter(|a| !matches!(a, Axiom::SubClassOf { .. })).cloned().collect());
        assert!(replay(&weaker, &t).is_err());
    }

    #[test]
    fn branch_arms_must_be_exhaustive() {
        let (o, mut t) = clash_of("Individual: a\n Types: (B or C), not B, not C");
        t.branch.as_mut().unwrap().arms.pop();
        assert!(replay(&o, &t).is_err());
    }

    #[test]
    fn role_hierarchy_closes_inverses() {
        let o = parse("ObjectProperty: p\n InverseOf: q\n SubPropertyOf: s").unwrap();
        let h = RoleHierarchy::new(&o);
        let q = RoleExpression::named(&EntityName::property("q"));
        let s = RoleExpression::named(&EntityName::property("s"));
        assert!(h.is_sub(&q.inverse(), &s));
        assert!(h.is_sub(&q, &s.inverse()));
        assert!(!h.is_sub(&q, &s));
    }
}
