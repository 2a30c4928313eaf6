//! Direct evaluation of expressions and axioms over a finite interpretation.
//!
//! Domains are small (the model finder never goes past a handful of
//! elements), so extensions are bitmasks over at most 64 elements.

use std::collections::HashMap;

use crate::model::{Axiom, ClassExpression, EntityName, Ontology, RoleExpression};

pub const MAX_DOMAIN: usize = 64;

/// Set of domain elements, bit `i` for element `i`.
pub type Extension = u64;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Interpretation {
    pub domain_size: usize,
    pub classes: HashMap<EntityName, Extension>,
    /// Row `x` holds the successors of element `x`.
    pub roles: HashMap<EntityName, Vec<Extension>>,
    pub individuals: HashMap<EntityName, usize>,
}

impl Interpretation {
    pub fn new(domain_size: usize) -> Self {
        assert!(domain_size > 0 && domain_size <= MAX_DOMAIN);
        Interpretation {
            domain_size,
            ..Default::default()
        }
    }

    pub fn all(&self) -> Extension {
        if self.domain_size == 64 {
            u64::MAX
        } else {
            (1u64 << self.domain_size) - 1
        }
    }

    pub fn class(&self, c: &EntityName) -> Extension {
        self.classes.get(c).copied().unwrap_or(0)
    }

    pub fn holds(&self, role: &RoleExpression, x: usize, y: usize) -> bool {
        let rows = match self.roles.get(role.property()) {
            Some(rows) => rows,
            None => return false,
        };
        match role {
            RoleExpression::Named(_) => rows[x] >> y & 1 == 1,
            RoleExpression::Inverse(_) => rows[y] >> x & 1 == 1,
        }
    }

    /// Successors of `x` under `role`.
    pub fn successors(&self, role: &RoleExpression, x: usize) -> Extension {
        (0..self.domain_size)
            .filter(|&y| self.holds(role, x, y))
            .fold(0, |acc, y| acc | 1 << y)
    }

    pub fn eval(&self, e: &ClassExpression) -> Extension {
        use ClassExpression as CE;
        let all = self.all();
        match e {
            CE::Named(c) => self.class(c),
            CE::Top => all,
            CE::Bottom => 0,
            CE::Not(inner) => all & !self.eval(inner),
            CE::And(es) => es.iter().fold(all, |acc, e| acc & self.eval(e)),
            CE::Or(es) => es.iter().fold(0, |acc, e| acc | self.eval(e)),
            CE::Some(r, f) => {
                let fill = self.eval(f);
                self.select(|x| self.successors(r, x) & fill != 0)
            }
            CE::Only(r, f) => {
                let fill = self.eval(f);
                self.select(|x| self.successors(r, x) & !fill == 0)
            }
            CE::AtMost(n, r, f) => {
                let fill = self.eval(f);
                self.select(|x| (self.successors(r, x) & fill).count_ones() <= *n)
            }
        }
    }

    fn select(&self, pred: impl Fn(usize) -> bool) -> Extension {
        (0..self.domain_size)
            .filter(|&x| pred(x))
            .fold(0, |acc, x| acc | 1 << x)
    }

    fn role_pairs(&self, p: &EntityName) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        if let Some(rows) = self.roles.get(p) {
            for (x, row) in rows.iter().enumerate() {
                for y in 0..self.domain_size {
                    if row >> y & 1 == 1 {
                        out.push((x, y));
                    }
                }
            }
        }
        out
    }

    /// Undefined individuals make assertions about them false.
    pub fn satisfies(&self, axiom: &Axiom) -> bool {
        let all = self.all();
        match axiom {
            Axiom::SubClassOf { sub, sup } => self.class(sub) & !self.eval(sup) == 0,
            Axiom::EquivalentClasses { class, expr } => self.class(class) == self.eval(expr),
            Axiom::DisjointClasses(a, b) => self.class(a) & self.class(b) == 0,
            Axiom::SubPropertyOf { sub, sup } => {
                let sup_role = RoleExpression::named(sup);
                self.role_pairs(sub).iter().all(|&(x, y)| self.holds(&sup_role, x, y))
            }
            Axiom::InverseProperties(r, s) => {
                let (rr, sr) = (RoleExpression::named(r), RoleExpression::named(s));
                self.role_pairs(r).iter().all(|&(x, y)| self.holds(&sr, y, x))
                    && self.role_pairs(s).iter().all(|&(x, y)| self.holds(&rr, y, x))
            }
            Axiom::Domain { property, class } => {
                let ext = self.class(class);
                self.role_pairs(property).iter().all(|&(x, _)| ext >> x & 1 == 1)
            }
            Axiom::Range { property, class } => {
                let ext = self.class(class);
                self.role_pairs(property).iter().all(|&(_, y)| ext >> y & 1 == 1)
            }
            Axiom::ClassAssertion { individual, class } => match self.individuals.get(individual) {
                Some(&x) => (self.eval(class) & all) >> x & 1 == 1,
                None => false,
            },
            Axiom::PropertyAssertion { property, subject, object } => {
                match (self.individuals.get(subject), self.individuals.get(object)) {
                    (Some(&x), Some(&y)) => self.holds(&RoleExpression::named(property), x, y),
                    _ => false,
                }
            }
            Axiom::Declaration(_) => true,
        }
    }

    pub fn is_model_of(&self, o: &Ontology) -> bool {
        o.axioms.iter().all(|a| self.satisfies(a))
    }

    /// Index of the first axiom the interpretation violates.
    pub fn first_violation(&self, o: &Ontology) -> Option<usize> {
        o.axioms.iter().position(|a| !self.satisfies(a))
    }
}
