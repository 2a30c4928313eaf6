//! Completion-graph expansion with depth-first branching.
//!
//! Rule priority: deterministic rules (agenda driven), then at-most merges,
//! then disjunctions, then existentials on unblocked nodes. Branches clone
//! the whole state, which is cheap at module scale.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::kb::{Expr, ExprId, Kb, Role};
use super::trace::{Branch, BranchOn, Choice, ClashKind, ClashTrace, NodeId, Rule, Step};
use super::{Blocking, ModelSketch, SketchNode, TableauConfig, TableauError};

#[derive(Clone, Debug)]
struct Node {
    label: BTreeSet<ExprId>,
    parent: Option<NodeId>,
    /// Individuals and anonymous roots; never blocked.
    root: bool,
    individuals: Vec<u32>,
    merged_into: Option<NodeId>,
    adj: Vec<u32>,
}

#[derive(Clone, Copy, Debug)]
struct Edge {
    from: NodeId,
    to: NodeId,
    prop: u32,
    alive: bool,
}

#[derive(Clone, Copy, Debug)]
enum Item {
    Label(NodeId, ExprId),
    Edge(u32),
}

#[derive(Clone, Debug, Default)]
pub(crate) struct State {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    edge_set: HashSet<(NodeId, NodeId, u32)>,
    agenda: VecDeque<Item>,
    trace: Vec<Step>,
}

impl State {
    fn branch(&self) -> State {
        State {
            trace: Vec::new(),
            ..self.clone()
        }
    }

    fn live(&self, x: NodeId) -> bool {
        self.nodes[x as usize].merged_into.is_none()
    }

    fn label(&self, x: NodeId) -> &BTreeSet<ExprId> {
        &self.nodes[x as usize].label
    }
}

pub(crate) enum Outcome {
    Open(State),
    Closed { trace: ClashTrace, reason: String },
}

enum Stop {
    Clash(String),
    Error(TableauError),
}

impl From<TableauError> for Stop {
    fn from(e: TableauError) -> Self {
        Stop::Error(e)
    }
}

pub(crate) struct Engine<'a> {
    kb: &'a Kb,
    cfg: &'a TableauConfig,
    steps: u64,
}

impl<'a> Engine<'a> {
    pub fn new(kb: &'a Kb, cfg: &'a TableauConfig) -> Self {
        Engine { kb, cfg, steps: 0 }
    }

    /// Runs the calculus on the A-Box, plus one anonymous root per entry of
    /// `extra_roots` carrying that expression.
    pub fn run(&mut self, extra_roots: &[ExprId]) -> Result<Outcome, TableauError> {
        let mut st = State::default();
        match self.init(&mut st, extra_roots) {
            Ok(()) => self.expand(st),
            Err(Stop::Clash(reason)) => Ok(Outcome::Closed {
                trace: ClashTrace { steps: st.trace, branch: None },
                reason,
            }),
            Err(Stop::Error(e)) => Err(e),
        }
    }

    fn init(&mut self, st: &mut State, extra_roots: &[ExprId]) -> Result<(), Stop> {
        let kb = self.kb;
        let mut ind_node: Vec<Option<NodeId>> = vec![None; kb.individuals.len()];
        // assertions and links interleaved in axiom order
        let mut events: Vec<(usize, bool, usize)> = kb
            .assertions
            .iter()
            .enumerate()
            .map(|(i, a)| (a.2, true, i))
            .chain(kb.links.iter().enumerate().map(|(i, l)| (l.3, false, i)))
            .collect();
        events.sort();
        for (_, is_assertion, i) in events {
            if is_assertion {
                let (ind, e, axiom) = kb.assertions[i];
                let (x, fresh) = self.individual_node(st, &mut ind_node, ind);
                self.record(st, Step::Assert {
                    node: x,
                    individual: kb.individuals[ind as usize].clone(),
                    axiom,
                    expr: kb.ces[e as usize].clone(),
                });
                self.add_label(st, x, e, None)?;
                if fresh {
                    self.add_globals(st, x)?;
                }
            } else {
                let (s, p, o, axiom) = kb.links[i];
                let (x, fresh_x) = self.individual_node(st, &mut ind_node, s);
                let (y, fresh_y) = self.individual_node(st, &mut ind_node, o);
                self.record(st, Step::Link {
                    from: x,
                    to: y,
                    subject: kb.individuals[s as usize].clone(),
                    object: kb.individuals[o as usize].clone(),
                    axiom,
                });
                self.add_edge(st, x, y, p);
                if fresh_x {
                    self.add_globals(st, x)?;
                }
                if fresh_y {
                    self.add_globals(st, y)?;
                }
            }
        }
        if st.nodes.is_empty() {
            let x = self.new_node(st, None, true)?;
            self.record(st, Step::Root { node: x });
            self.add_globals(st, x)?;
        }
        for &e in extra_roots {
            let x = self.new_node(st, None, true)?;
            self.record(st, Step::Root { node: x });
            self.add_label(st, x, e, None)?;
            self.add_globals(st, x)?;
        }
        Ok(())
    }

    fn individual_node(&self, st: &mut State, map: &mut [Option<NodeId>], ind: u32) -> (NodeId, bool) {
        match map[ind as usize] {
            Some(x) => (x, false),
            None => {
                let x = st.nodes.len() as NodeId;
                st.nodes.push(Node {
                    label: BTreeSet::new(),
                    parent: None,
                    root: true,
                    individuals: vec![ind],
                    merged_into: None,
                    adj: Vec::new(),
                });
                map[ind as usize] = Some(x);
                (x, true)
            }
        }
    }

    fn new_node(&self, st: &mut State, parent: Option<NodeId>, root: bool) -> Result<NodeId, TableauError> {
        if st.nodes.len() >= self.cfg.max_nodes {
            return Err(TableauError::ResourceLimit { nodes: st.nodes.len() });
        }
        st.nodes.push(Node {
            label: BTreeSet::new(),
            parent,
            root,
            individuals: Vec::new(),
            merged_into: None,
            adj: Vec::new(),
        });
        Ok(st.nodes.len() as NodeId - 1)
    }

    fn record(&self, st: &mut State, step: Step) {
        if self.cfg.record_trace {
            st.trace.push(step);
        }
    }

    fn tick(&mut self) -> Result<(), TableauError> {
        self.steps += 1;
        if self.steps > self.cfg.max_steps {
            return Err(TableauError::BudgetExceeded { steps: self.cfg.max_steps });
        }
        Ok(())
    }

    fn add_globals(&mut self, st: &mut State, x: NodeId) -> Result<(), Stop> {
        for &(g, axiom) in &self.kb.global {
            self.add_label(st, x, g, Some(Rule::Global { axiom }))?;
        }
        Ok(())
    }

    /// Adds `e` to the label of `x`. `rule` is recorded when given; callers
    /// pass `None` when an enclosing step already accounts for the addition.
    fn add_label(&mut self, st: &mut State, x: NodeId, e: ExprId, rule: Option<Rule>) -> Result<(), Stop> {
        if !st.nodes[x as usize].label.insert(e) {
            return Ok(());
        }
        self.tick()?;
        if let Some(rule) = rule {
            self.record(st, Step::Derive {
                node: x,
                expr: self.kb.ces[e as usize].clone(),
                rule,
            });
        }
        st.agenda.push_back(Item::Label(x, e));
        self.check_clash(st, x, e)
    }

    fn check_clash(&self, st: &mut State, x: NodeId, e: ExprId) -> Result<(), Stop> {
        let kb = self.kb;
        let label = st.label(x);
        let kind = match kb.exprs[e as usize] {
            Expr::Bottom => Some(ClashKind::Bottom),
            Expr::Name(c) if kb.not_expr[c as usize].map_or(false, |n| label.contains(&n)) => {
                Some(ClashKind::Complement(kb.classes[c as usize].clone()))
            }
            Expr::NotName(c) if kb.name_expr[c as usize].map_or(false, |n| label.contains(&n)) => {
                Some(ClashKind::Complement(kb.classes[c as usize].clone()))
            }
            _ => None,
        };
        match kind {
            Some(kind) => Err(self.clash(st, x, kind)),
            None => Ok(()),
        }
    }

    fn clash(&self, st: &mut State, x: NodeId, kind: ClashKind) -> Stop {
        let step = Step::Clash { node: x, kind };
        let reason = step.to_string();
        self.record(st, step);
        Stop::Clash(reason)
    }

    fn add_edge(&self, st: &mut State, from: NodeId, to: NodeId, prop: u32) {
        if !st.edge_set.insert((from, to, prop)) {
            return;
        }
        let ei = st.edges.len() as u32;
        st.edges.push(Edge { from, to, prop, alive: true });
        st.nodes[from as usize].adj.push(ei);
        if to != from {
            st.nodes[to as usize].adj.push(ei);
        }
        st.agenda.push_back(Item::Edge(ei));
    }

    /// Live neighbours of `x` with the role that reaches them.
    fn neighbours(&self, st: &State, x: NodeId) -> Vec<(Role, NodeId)> {
        let mut out = Vec::new();
        for &ei in &st.nodes[x as usize].adj {
            let e = st.edges[ei as usize];
            if !e.alive {
                continue;
            }
            if e.from == x {
                out.push((2 * e.prop, e.to));
            }
            if e.to == x {
                out.push((2 * e.prop + 1, e.from));
            }
        }
        out
    }

    fn saturate(&mut self, st: &mut State) -> Result<(), Stop> {
        while let Some(item) = st.agenda.pop_front() {
            match item {
                Item::Label(x, e) => {
                    if st.live(x) {
                        self.label_rules(st, x, e)?;
                    }
                }
                Item::Edge(ei) => {
                    if st.edges[ei as usize].alive {
                        self.edge_rules(st, ei)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn label_rules(&mut self, st: &mut State, x: NodeId, e: ExprId) -> Result<(), Stop> {
        let kb = self.kb;
        match &kb.exprs[e as usize] {
            Expr::Name(c) => {
                for &(t, axiom) in &kb.unfold[*c as usize] {
                    let from = kb.ces[e as usize].clone();
                    self.add_label(st, x, t, Some(Rule::Unfold { axiom, from }))?;
                }
            }
            Expr::And(es) => {
                for &c in es {
                    let of = kb.ces[e as usize].clone();
                    self.add_label(st, x, c, Some(Rule::Conjunct { of }))?;
                }
            }
            Expr::Only(s, c) => {
                for (r, y) in self.neighbours(st, x) {
                    if kb.is_sub(r, *s) {
                        let rule = Rule::Forall { from: x, via: kb.role_expr(r), source: kb.ces[e as usize].clone() };
                        self.add_label(st, y, *c, Some(rule))?;
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn edge_rules(&mut self, st: &mut State, ei: u32) -> Result<(), Stop> {
        let kb = self.kb;
        let e = st.edges[ei as usize];
        for (x, y, r) in [(e.from, e.to, 2 * e.prop), (e.to, e.from, 2 * e.prop + 1)] {
            for &s in &kb.sups[r as usize] {
                let (table, is_domain) = if s % 2 == 0 { (&kb.domain, true) } else { (&kb.range, false) };
                for &(c, axiom) in &table[(s / 2) as usize] {
                    let via = kb.role_expr(r);
                    let rule = if is_domain {
                        Rule::Domain { axiom, neighbour: y, via }
                    } else {
                        Rule::Range { axiom, neighbour: y, via }
                    };
                    self.add_label(st, x, c, Some(rule))?;
                }
            }
            let universals: Vec<(ExprId, ExprId)> = st
                .label(x)
                .iter()
                .filter_map(|&u| match kb.exprs[u as usize] {
                    Expr::Only(s, c) if kb.is_sub(r, s) => Some((u, c)),
                    _ => None,
                })
                .collect();
            for (u, c) in universals {
                let rule = Rule::Forall { from: x, via: kb.role_expr(r), source: kb.ces[u as usize].clone() };
                self.add_label(st, y, c, Some(rule))?;
            }
        }
        Ok(())
    }

    fn expand(&mut self, mut st: State) -> Result<Outcome, TableauError> {
        loop {
            match self.saturate(&mut st) {
                Ok(()) => {}
                Err(Stop::Clash(reason)) => return Ok(closed(st.trace, reason)),
                Err(Stop::Error(e)) => return Err(e),
            }
            if let Some((x, e, n, nbs)) = self.find_at_most(&st) {
                let kb = self.kb;
                if n == 0 {
                    let (r, y) = nbs[0];
                    let kind = ClashKind::AtMostZero {
                        restriction: kb.ces[e as usize].clone(),
                        neighbour: y,
                        via: kb.role_expr(r),
                    };
                    let Stop::Clash(reason) = self.clash(&mut st, x, kind) else { unreachable!() };
                    return Ok(closed(st.trace, reason));
                }
                let ids: Vec<NodeId> = nbs.iter().take(n as usize + 1).map(|&(_, y)| y).collect();
                let mut arms = Vec::new();
                let mut first_reason = None;
                for i in 0..ids.len() {
                    for j in i + 1..ids.len() {
                        self.tick()?;
                        let (from, into) = merge_direction(&st, x, ids[i], ids[j]);
                        let mut child = st.branch();
                        let outcome = match self.merge(&mut child, from, into) {
                            Ok(()) => self.expand(child)?,
                            Err(Stop::Clash(reason)) => closed(child.trace, reason),
                            Err(Stop::Error(e)) => return Err(e),
                        };
                        match outcome {
                            Outcome::Open(s) => return Ok(Outcome::Open(s)),
                            Outcome::Closed { trace, reason } => {
                                first_reason.get_or_insert(reason);
                                arms.push((Choice::Merge { from, into }, trace));
                            }
                        }
                    }
                }
                let on = BranchOn::AtMost { restriction: kb.ces[e as usize].clone(), neighbours: ids };
                return Ok(branch_closed(st.trace, x, on, arms, first_reason));
            }
            if let Some((x, e)) = self.find_or(&st) {
                let kb = self.kb;
                let Expr::Or(disjuncts) = &kb.exprs[e as usize] else { unreachable!() };
                let mut arms = Vec::new();
                let mut first_reason = None;
                for &d in disjuncts {
                    let mut child = st.branch();
                    let outcome = match self.add_label(&mut child, x, d, None) {
                        Ok(()) => self.expand(child)?,
                        Err(Stop::Clash(reason)) => closed(child.trace, reason),
                        Err(Stop::Error(e)) => return Err(e),
                    };
                    match outcome {
                        Outcome::Open(s) => return Ok(Outcome::Open(s)),
                        Outcome::Closed { trace, reason } => {
                            first_reason.get_or_insert(reason);
                            arms.push((Choice::Disjunct(kb.ces[d as usize].clone()), trace));
                        }
                    }
                }
                let on = BranchOn::Disjunction(kb.ces[e as usize].clone());
                return Ok(branch_closed(st.trace, x, on, arms, first_reason));
            }
            if let Some((x, e)) = self.find_some(&st) {
                match self.spawn(&mut st, x, e) {
                    Ok(()) => continue,
                    Err(Stop::Clash(reason)) => return Ok(closed(st.trace, reason)),
                    Err(Stop::Error(e)) => return Err(e),
                }
            }
            return Ok(Outcome::Open(st));
        }
    }

    /// First at-most restriction with more distinct neighbours than allowed.
    fn find_at_most(&self, st: &State) -> Option<(NodeId, ExprId, u32, Vec<(Role, NodeId)>)> {
        let kb = self.kb;
        for x in 0..st.nodes.len() as NodeId {
            if !st.live(x) {
                continue;
            }
            for &e in st.label(x) {
                if let Expr::AtMost(n, s) = kb.exprs[e as usize] {
                    let mut nbs: Vec<(Role, NodeId)> =
                        self.neighbours(st, x).into_iter().filter(|&(r, _)| kb.is_sub(r, s)).collect();
                    nbs.sort_by_key(|&(r, y)| (y, r));
                    nbs.dedup_by_key(|&mut (_, y)| y);
                    if nbs.len() > n as usize {
                        return Some((x, e, n, nbs));
                    }
                }
            }
        }
        None
    }

    fn find_or(&self, st: &State) -> Option<(NodeId, ExprId)> {
        for x in 0..st.nodes.len() as NodeId {
            if !st.live(x) {
                continue;
            }
            let label = st.label(x);
            for &e in label {
                if let Expr::Or(ds) = &self.kb.exprs[e as usize] {
                    if !ds.iter().any(|d| label.contains(d)) {
                        return Some((x, e));
                    }
                }
            }
        }
        None
    }

    fn find_some(&self, st: &State) -> Option<(NodeId, ExprId)> {
        let kb = self.kb;
        let blocked = blocking(st);
        for x in 0..st.nodes.len() as NodeId {
            if !st.live(x) || blocked[x as usize] != Blocking::Open {
                continue;
            }
            let mut nbs: Option<Vec<(Role, NodeId)>> = None;
            for &e in st.label(x) {
                if let Expr::Some(s, c) = kb.exprs[e as usize] {
                    let nbs = nbs.get_or_insert_with(|| self.neighbours(st, x));
                    let satisfied = nbs.iter().any(|&(r, y)| kb.is_sub(r, s) && st.label(y).contains(&c));
                    if !satisfied {
                        return Some((x, e));
                    }
                }
            }
        }
        None
    }

    fn spawn(&mut self, st: &mut State, x: NodeId, e: ExprId) -> Result<(), Stop> {
        let Expr::Some(s, c) = self.kb.exprs[e as usize] else { unreachable!() };
        self.tick()?;
        let z = self.new_node(st, Some(x), false)?;
        self.record(st, Step::Spawn { parent: x, child: z, source: self.kb.ces[e as usize].clone() });
        if s % 2 == 0 {
            self.add_edge(st, x, z, s / 2);
        } else {
            self.add_edge(st, z, x, s / 2);
        }
        self.add_label(st, z, c, None)?;
        self.add_globals(st, z)
    }

    fn merge(&mut self, st: &mut State, from: NodeId, into: NodeId) -> Result<(), Stop> {
        let z = from as usize;
        st.nodes[z].merged_into = Some(into);
        let label = std::mem::take(&mut st.nodes[z].label);
        let inds = std::mem::take(&mut st.nodes[z].individuals);
        st.nodes[into as usize].individuals.extend(inds);
        // edges first, so label rules see the merged neighbourhood
        let adj = std::mem::take(&mut st.nodes[z].adj);
        for ei in adj {
            let e = st.edges[ei as usize];
            if !e.alive {
                continue;
            }
            st.edges[ei as usize].alive = false;
            st.edge_set.remove(&(e.from, e.to, e.prop));
            let f = if e.from == from { into } else { e.from };
            let t = if e.to == from { into } else { e.to };
            self.add_edge(st, f, t, e.prop);
        }
        for n in st.nodes.iter_mut() {
            if n.parent == Some(from) {
                n.parent = Some(into);
            }
        }
        for e in label {
            self.add_label(st, into, e, None)?;
        }
        Ok(())
    }

    pub fn sketch(&self, st: &State) -> ModelSketch {
        let kb = self.kb;
        let blocked = blocking(st);
        let mut nodes = Vec::new();
        for (i, n) in st.nodes.iter().enumerate() {
            if n.merged_into.is_some() {
                continue;
            }
            nodes.push(SketchNode {
                id: i as NodeId,
                individuals: n.individuals.iter().map(|&k| kb.individuals[k as usize].clone()).collect(),
                label: n.label.iter().map(|&e| kb.ces[e as usize].clone()).collect(),
                parent: n.parent,
                blocked: blocked[i].clone(),
            });
        }
        let edges = st
            .edges
            .iter()
            .filter(|e| e.alive)
            .map(|e| (e.from, kb.props[e.prop as usize].clone(), e.to))
            .collect();
        ModelSketch { nodes, edges }
    }
}

fn closed(steps: Vec<Step>, reason: String) -> Outcome {
    Outcome::Closed { trace: ClashTrace { steps, branch: None }, reason }
}

fn branch_closed(
    steps: Vec<Step>,
    node: NodeId,
    on: BranchOn,
    arms: Vec<(Choice, ClashTrace)>,
    reason: Option<String>,
) -> Outcome {
    Outcome::Closed {
        trace: ClashTrace { steps, branch: Some(Box::new(Branch { node, on, arms })) },
        reason: reason.unwrap_or_default(),
    }
}

/// Roots win, then the parent of `x`, then the older node.
fn merge_direction(st: &State, x: NodeId, a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    let (ra, rb) = (st.nodes[a as usize].root, st.nodes[b as usize].root);
    if ra != rb {
        return if ra { (b, a) } else { (a, b) };
    }
    let parent = st.nodes[x as usize].parent;
    if parent == Some(a) {
        (b, a)
    } else if parent == Some(b) {
        (a, b)
    } else if a < b {
        (b, a)
    } else {
        (a, b)
    }
}

fn edge_label(st: &State, a: NodeId, b: NodeId) -> Vec<Role> {
    let mut out = Vec::new();
    for &ei in &st.nodes[a as usize].adj {
        let e = st.edges[ei as usize];
        if !e.alive {
            continue;
        }
        if e.from == a && e.to == b {
            out.push(2 * e.prop);
        }
        if e.to == a && e.from == b {
            out.push(2 * e.prop + 1);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Anywhere pairwise blocking: a tree node is blocked by any earlier open
/// tree node with the same label, the same parent label and the same edge
/// from its parent. Parents always have smaller ids than their children, so
/// one pass in id order sees every ancestor's status first.
fn blocking(st: &State) -> Vec<Blocking> {
    let mut out = vec![Blocking::Open; st.nodes.len()];
    let mut seen: HashMap<(&BTreeSet<ExprId>, &BTreeSet<ExprId>, Vec<Role>), NodeId> = HashMap::new();
    for x in 0..st.nodes.len() {
        let node = &st.nodes[x];
        if node.merged_into.is_some() || node.root {
            continue;
        }
        let Some(p) = node.parent else { continue };
        if out[p as usize] != Blocking::Open {
            out[x] = Blocking::Indirect;
            continue;
        }
        let key = (&node.label, &st.nodes[p as usize].label, edge_label(st, p, x as NodeId));
        match seen.get(&key) {
            Some(&y) => out[x] = Blocking::Direct(y),
            None => {
                seen.insert(key, x as NodeId);
            }
        }
    }
    out
}
