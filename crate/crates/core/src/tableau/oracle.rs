//! Exhaustive finite-model search, used as an independent oracle.
//!
//! Backtracks over a partial interpretation: individuals are placed first
//! (with symmetry breaking), then class memberships and role edges element by
//! element. After every assignment each axiom is evaluated in three-valued
//! logic and the branch is cut as soon as one is definitely false. Every
//! model found is re-checked with the two-valued evaluator in
//! [`crate::semantics`].

use std::collections::HashMap;

use thiserror::Error;

use super::probe_ontology;
use crate::model::{Axiom, ClassExpression, EntityKind, EntityName, Ontology, OntologyStatus};
use crate::semantics::Interpretation;

pub const DEFAULT_BUDGET: u64 = 50_000_000;
pub const MAX_ORACLE_DOMAIN: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("search visited more than {0} partial interpretations")]
    BudgetExceeded(u64),
    #[error("domain size {0} is beyond the supported maximum of 4")]
    DomainTooLarge(usize),
}

#[derive(Clone, Debug)]
enum Ex {
    Top,
    Bottom,
    Name(usize),
    Not(Box<Ex>),
    And(Vec<Ex>),
    Or(Vec<Ex>),
    Some(usize, bool, Box<Ex>),
    Only(usize, bool, Box<Ex>),
    AtMost(u32, usize, bool, Box<Ex>),
}

#[derive(Clone, Debug)]
enum Ax {
    Sub(usize, Ex),
    Equiv(usize, Ex),
    Disj(usize, usize),
    SubProp(usize, usize),
    Inv(usize, usize),
    Dom(usize, usize),
    Ran(usize, usize),
    Class(usize, Ex),
    Fact(usize, usize, usize),
}

struct Compiled {
    classes: Vec<EntityName>,
    props: Vec<EntityName>,
    inds: Vec<EntityName>,
    axioms: Vec<Ax>,
}

fn compile(o: &Ontology) -> Compiled {
    let mut ix: HashMap<EntityName, usize> = HashMap::new();
    let (mut classes, mut props, mut inds) = (Vec::new(), Vec::new(), Vec::new());
    for n in o.signature() {
        let list = match n.kind() {
            EntityKind::Class => &mut classes,
            EntityKind::ObjectProperty => &mut props,
            EntityKind::Individual => &mut inds,
        };
        ix.insert(n.clone(), list.len());
        list.push(n);
    }
    fn ex(e: &ClassExpression, ix: &HashMap<EntityName, usize>) -> Ex {
        use ClassExpression as CE;
        match e {
            CE::Top => Ex::Top,
            CE::Bottom => Ex::Bottom,
            CE::Named(c) => Ex::Name(ix[c]),
            CE::Not(e) => Ex::Not(Box::new(ex(e, ix))),
            CE::And(es) => Ex::And(es.iter().map(|e| ex(e, ix)).collect()),
            CE::Or(es) => Ex::Or(es.iter().map(|e| ex(e, ix)).collect()),
            CE::Some(r, f) => Ex::Some(ix[r.property()], r.is_inverse(), Box::new(ex(f, ix))),
            CE::Only(r, f) => Ex::Only(ix[r.property()], r.is_inverse(), Box::new(ex(f, ix))),
            CE::AtMost(n, r, f) => Ex::AtMost(*n, ix[r.property()], r.is_inverse(), Box::new(ex(f, ix))),
        }
    }
    let axioms = o
        .axioms
        .iter()
        .filter_map(|a| {
            Some(match a {
                Axiom::SubClassOf { sub, sup } => Ax::Sub(ix[sub], ex(sup, &ix)),
                Axiom::EquivalentClasses { class, expr } => Ax::Equiv(ix[class], ex(expr, &ix)),
                Axiom::DisjointClasses(a, b) => Ax::Disj(ix[a], ix[b]),
                Axiom::SubPropertyOf { sub, sup } => Ax::SubProp(ix[sub], ix[sup]),
                Axiom::InverseProperties(p, q) => Ax::Inv(ix[p], ix[q]),
                Axiom::Domain { property, class } => Ax::Dom(ix[property], ix[class]),
                Axiom::Range { property, class } => Ax::Ran(ix[property], ix[class]),
                Axiom::ClassAssertion { individual, class } => Ax::Class(ix[individual], ex(class, &ix)),
                Axiom::PropertyAssertion { property, subject, object } => {
                    Ax::Fact(ix[property], ix[subject], ix[object])
                }
                Axiom::Declaration(_) => return None,
            })
        })
        .collect();
    Compiled { classes, props, inds, axioms }
}

/// Partial interpretation: a bit is meaningful only where `known` is set.
#[derive(Clone)]
struct Partial {
    n: usize,
    all: u64,
    class_known: Vec<u64>,
    class_val: Vec<u64>,
    role_known: Vec<Vec<u64>>,
    role_val: Vec<Vec<u64>>,
    ind: Vec<usize>,
}

/// Elements where an expression is surely true and surely false.
type Tri = (u64, u64);

impl Partial {
    fn class(&self, c: usize) -> Tri {
        let k = self.class_known[c];
        (k & self.class_val[c], k & !self.class_val[c])
    }

    /// Successors of `x` over the role that are surely present and surely absent.
    fn succ(&self, p: usize, inv: bool, x: usize) -> Tri {
        if !inv {
            let k = self.role_known[p][x];
            return (k & self.role_val[p][x], k & !self.role_val[p][x]);
        }
        let (mut t, mut f) = (0, 0);
        for y in 0..self.n {
            if self.role_known[p][y] >> x & 1 == 1 {
                if self.role_val[p][y] >> x & 1 == 1 {
                    t |= 1 << y;
                } else {
                    f |= 1 << y;
                }
            }
        }
        (t, f)
    }

    fn eval(&self, e: &Ex) -> Tri {
        match e {
            Ex::Top => (self.all, 0),
            Ex::Bottom => (0, self.all),
            Ex::Name(c) => self.class(*c),
            Ex::Not(e) => {
                let (t, f) = self.eval(e);
                (f, t)
            }
            Ex::And(es) => es.iter().fold((self.all, 0), |(t, f), e| {
                let (et, ef) = self.eval(e);
                (t & et, f | ef)
            }),
            Ex::Or(es) => es.iter().fold((0, self.all), |(t, f), e| {
                let (et, ef) = self.eval(e);
                (t | et, f & ef)
            }),
            Ex::Some(p, inv, c) => {
                let (ct, cf) = self.eval(c);
                let (mut t, mut f) = (0, 0);
                for x in 0..self.n {
                    let (st, sf) = self.succ(*p, *inv, x);
                    if st & ct != 0 {
                        t |= 1 << x;
                    }
                    if (sf | cf) & self.all == self.all {
                        f |= 1 << x;
                    }
                }
                (t, f)
            }
            Ex::Only(p, inv, c) => {
                let (ct, cf) = self.eval(c);
                let (mut t, mut f) = (0, 0);
                for x in 0..self.n {
                    let (st, sf) = self.succ(*p, *inv, x);
                    if (sf | ct) & self.all == self.all {
                        t |= 1 << x;
                    }
                    if st & cf != 0 {
                        f |= 1 << x;
                    }
                }
                (t, f)
            }
            Ex::AtMost(n, p, inv, c) => {
                let (ct, cf) = self.eval(c);
                let (mut t, mut f) = (0, 0);
                for x in 0..self.n {
                    let (st, sf) = self.succ(*p, *inv, x);
                    let surely = (st & ct).count_ones();
                    let possibly = (!sf & !cf & self.all).count_ones();
                    if surely > *n {
                        f |= 1 << x;
                    }
                    if possibly <= *n {
                        t |= 1 << x;
                    }
                }
                (t, f)
            }
        }
    }

    fn edge(&self, p: usize, x: usize, y: usize) -> Option<bool> {
        (self.role_known[p][x] >> y & 1 == 1).then(|| self.role_val[p][x] >> y & 1 == 1)
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |x| (0..self.n).map(move |y| (x, y)))
    }

    fn violated(&self, a: &Ax) -> bool {
        match a {
            Ax::Sub(c, e) => self.class(*c).0 & self.eval(e).1 != 0,
            Ax::Equiv(c, e) => {
                let (ct, cf) = self.class(*c);
                let (et, ef) = self.eval(e);
                ct & ef != 0 || cf & et != 0
            }
            Ax::Disj(a, b) => self.class(*a).0 & self.class(*b).0 != 0,
            Ax::SubProp(p, q) => self
                .pairs()
                .any(|(x, y)| self.edge(*p, x, y) == Some(true) && self.edge(*q, x, y) == Some(false)),
            Ax::Inv(p, q) => self.pairs().any(|(x, y)| {
                (self.edge(*p, x, y) == Some(true) && self.edge(*q, y, x) == Some(false))
                    || (self.edge(*q, x, y) == Some(true) && self.edge(*p, y, x) == Some(false))
            }),
            Ax::Dom(p, c) => {
                let cf = self.class(*c).1;
                self.pairs().any(|(x, y)| self.edge(*p, x, y) == Some(true) && cf >> x & 1 == 1)
            }
            Ax::Ran(p, c) => {
                let cf = self.class(*c).1;
                self.pairs().any(|(x, y)| self.edge(*p, x, y) == Some(true) && cf >> y & 1 == 1)
            }
            Ax::Class(i, e) => self.eval(e).1 >> self.ind[*i] & 1 == 1,
            Ax::Fact(p, a, b) => self.edge(*p, self.ind[*a], self.ind[*b]) == Some(false),
        }
    }
}

#[derive(Clone, Copy)]
enum Var {
    Class(usize, usize),
    Role(usize, usize, usize),
}

struct Search<'c> {
    c: &'c Compiled,
    o: &'c Ontology,
    vars: Vec<Var>,
    visited: u64,
    budget: u64,
}

impl Search<'_> {
    fn any_violated(&self, st: &Partial) -> bool {
        self.c.axioms.iter().any(|a| st.violated(a))
    }

    fn place_individuals(&mut self, st: &mut Partial, i: usize, used: usize) -> Result<Option<Interpretation>, OracleError> {
        if i == self.c.inds.len() {
            if self.any_violated(st) {
                return Ok(None);
            }
            return self.assign(st, 0);
        }
        // element k is only tried once elements 0..k are in use
        for x in 0..st.n.min(used + 1) {
            st.ind[i] = x;
            if let Some(m) = self.place_individuals(st, i + 1, used.max(x + 1))? {
                return Ok(Some(m));
            }
        }
        Ok(None)
    }

    fn assign(&mut self, st: &mut Partial, k: usize) -> Result<Option<Interpretation>, OracleError> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(OracleError::BudgetExceeded(self.budget));
        }
        if k == self.vars.len() {
            let interp = self.to_interpretation(st);
            return Ok(interp.is_model_of(self.o).then_some(interp));
        }
        for value in [false, true] {
            match self.vars[k] {
                Var::Class(c, x) => {
                    st.class_known[c] |= 1 << x;
                    set_bit(&mut st.class_val[c], x, value);
                }
                Var::Role(p, x, y) => {
                    st.role_known[p][x] |= 1 << y;
                    set_bit(&mut st.role_val[p][x], y, value);
                }
            }
            if !self.any_violated(st) {
                if let Some(m) = self.assign(st, k + 1)? {
                    return Ok(Some(m));
                }
            }
        }
        match self.vars[k] {
            Var::Class(c, x) => st.class_known[c] &= !(1 << x),
            Var::Role(p, x, y) => st.role_known[p][x] &= !(1 << y),
        }
        Ok(None)
    }

    fn to_interpretation(&self, st: &Partial) -> Interpretation {
        let mut i = Interpretation::new(st.n);
        for (c, name) in self.c.classes.iter().enumerate() {
            i.classes.insert(name.clone(), st.class_val[c] & st.all);
        }
        for (p, name) in self.c.props.iter().enumerate() {
            i.roles.insert(name.clone(), st.role_val[p].iter().map(|r| r & st.all).collect());
        }
        for (k, name) in self.c.inds.iter().enumerate() {
            i.individuals.insert(name.clone(), st.ind[k]);
        }
        i
    }
}

fn set_bit(word: &mut u64, bit: usize, value: bool) {
    if value {
        *word |= 1 << bit;
    } else {
        *word &= !(1 << bit);
    }
}

/// First model over a domain of 1..=`max_domain` elements, smallest first.
pub fn finite_model_search(o: &Ontology, max_domain: usize) -> Result<Option<Interpretation>, OracleError> {
    finite_model_search_with(o, max_domain, DEFAULT_BUDGET)
}

pub fn finite_model_search_with(
    o: &Ontology,
    max_domain: usize,
    budget: u64,
) -> Result<Option<Interpretation>, OracleError> {
    if max_domain > MAX_ORACLE_DOMAIN {
        return Err(OracleError::DomainTooLarge(max_domain));
    }
    let c = compile(o);
    let mut search = Search { c: &c, o, vars: Vec::new(), visited: 0, budget };
    for n in 1..=max_domain {
        let mut vars = Vec::new();
        for x in 0..n {
            for cl in 0..c.classes.len() {
                vars.push(Var::Class(cl, x));
            }
            for p in 0..c.props.len() {
                for y in 0..=x {
                    vars.push(Var::Role(p, x, y));
                    if y != x {
                        vars.push(Var::Role(p, y, x));
                    }
                }
            }
        }
        search.vars = vars;
        let mut st = Partial {
            n,
            all: (1u64 << n) - 1,
            class_known: vec![0; c.classes.len()],
            class_val: vec![0; c.classes.len()],
            role_known: vec![vec![0; n]; c.props.len()],
            role_val: vec![vec![0; n]; c.props.len()],
            ind: vec![0; c.inds.len()],
        };
        if let Some(m) = search.place_individuals(&mut st, 0, 0)? {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// Three-valued status as decided by the oracle alone: inconsistent when no
/// model of size up to `max_domain` exists, and a class is unsatisfiable
/// when no such model populates it.
pub fn oracle_status(o: &Ontology, max_domain: usize) -> Result<OntologyStatus, OracleError> {
    if finite_model_search(o, max_domain)?.is_none() {
        return Ok(OntologyStatus::Inconsistent(format!("no model with at most {max_domain} elements")));
    }
    let mut unsat = Vec::new();
    for c in o.classes() {
        if finite_model_search(&probe_ontology(o, &c), max_domain)?.is_none() {
            unsat.push(c);
        }
    }
    Ok(if unsat.is_empty() { OntologyStatus::ConsistentCoherent } else { OntologyStatus::Incoherent(unsat) })
}
