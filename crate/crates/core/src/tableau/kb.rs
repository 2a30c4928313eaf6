//! Compilation of an ontology into the indexed form the engine works on.

use std::collections::HashMap;

use super::TableauError;
use crate::model::{nnf, Axiom, ClassExpression, EntityKind, EntityName, Ontology, RoleExpression};

pub(crate) type ExprId = u32;
/// `2 * property + 1` for the inverse of `property`.
pub(crate) type Role = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Expr {
    Top,
    Bottom,
    Name(u32),
    NotName(u32),
    And(Vec<ExprId>),
    Or(Vec<ExprId>),
    Some(Role, ExprId),
    Only(Role, ExprId),
    /// Filler is always Top.
    AtMost(u32, Role),
}

#[derive(Clone, Debug)]
pub(crate) struct Kb {
    pub classes: Vec<EntityName>,
    pub props: Vec<EntityName>,
    pub individuals: Vec<EntityName>,
    class_ix: HashMap<EntityName, u32>,
    prop_ix: HashMap<EntityName, u32>,
    ind_ix: HashMap<EntityName, u32>,
    pub exprs: Vec<Expr>,
    pub ces: Vec<ClassExpression>,
    intern: HashMap<Expr, ExprId>,
    /// Per class: what a `Name(c)` in a label unfolds to, with the source axiom.
    pub unfold: Vec<Vec<(ExprId, usize)>>,
    /// Added to every node.
    pub global: Vec<(ExprId, usize)>,
    pub domain: Vec<Vec<(ExprId, usize)>>,
    pub range: Vec<Vec<(ExprId, usize)>>,
    /// `sub[r * roles + s]` iff r is a sub-role of s (reflexive, transitive).
    sub: Vec<bool>,
    /// Super-roles of each role, ascending.
    pub sups: Vec<Vec<Role>>,
    pub assertions: Vec<(u32, ExprId, usize)>,
    pub links: Vec<(u32, u32, u32, usize)>,
    pub name_expr: Vec<Option<ExprId>>,
    pub not_expr: Vec<Option<ExprId>>,
}

impl Kb {
    pub fn compile(o: &Ontology) -> Result<Kb, TableauError> {
        let sig = o.signature();
        let mut kb = Kb {
            classes: Vec::new(),
            props: Vec::new(),
            individuals: Vec::new(),
            class_ix: HashMap::new(),
            prop_ix: HashMap::new(),
            ind_ix: HashMap::new(),
            exprs: Vec::new(),
            ces: Vec::new(),
            intern: HashMap::new(),
            unfold: Vec::new(),
            global: Vec::new(),
            domain: Vec::new(),
            range: Vec::new(),
            sub: Vec::new(),
            sups: Vec::new(),
            assertions: Vec::new(),
            links: Vec::new(),
            name_expr: Vec::new(),
            not_expr: Vec::new(),
        };
        for n in &sig {
            match n.kind() {
                EntityKind::Class => {
                    kb.class_ix.insert(n.clone(), kb.classes.len() as u32);
                    kb.classes.push(n.clone());
                }
                EntityKind::ObjectProperty => {
                    kb.prop_ix.insert(n.clone(), kb.props.len() as u32);
                    kb.props.push(n.clone());
                }
                EntityKind::Individual => {
                    kb.ind_ix.insert(n.clone(), kb.individuals.len() as u32);
                    kb.individuals.push(n.clone());
                }
            }
        }
        kb.unfold = vec![Vec::new(); kb.classes.len()];
        kb.domain = vec![Vec::new(); kb.props.len()];
        kb.range = vec![Vec::new(); kb.props.len()];
        let roles = 2 * kb.props.len();
        kb.sub = vec![false; roles * roles];
        for r in 0..roles {
            kb.sub[r * roles + r] = true;
        }

        for (i, axiom) in o.axioms.iter().enumerate() {
            kb.add_axiom(i, axiom)?;
        }
        kb.close_roles();
        kb.name_expr = (0..kb.classes.len() as u32).map(|c| kb.intern.get(&Expr::Name(c)).copied()).collect();
        kb.not_expr = (0..kb.classes.len() as u32).map(|c| kb.intern.get(&Expr::NotName(c)).copied()).collect();
        Ok(kb)
    }

    fn add_axiom(&mut self, i: usize, axiom: &Axiom) -> Result<(), TableauError> {
        let role = |kb: &Kb, p: &EntityName| 2 * kb.prop_ix[p];
        match axiom {
            Axiom::SubClassOf { sub, sup } => {
                let c = self.class_ix[sub] as usize;
                let e = self.expr(&nnf(sup))?;
                self.unfold[c].push((e, i));
            }
            Axiom::EquivalentClasses { class, expr } => {
                let a = self.class_ix[class] as usize;
                match expr {
                    ClassExpression::Named(b) => {
                        let b = self.class_ix[b] as usize;
                        let eb = self.intern_expr(Expr::Name(b as u32), ClassExpression::Named(self.classes[b].clone()));
                        let ea = self.intern_expr(Expr::Name(a as u32), ClassExpression::Named(self.classes[a].clone()));
                        self.unfold[a].push((eb, i));
                        self.unfold[b].push((ea, i));
                    }
                    _ => {
                        let d = self.expr(&nnf(expr))?;
                        self.unfold[a].push((d, i));
                        let gci = nnf(&ClassExpression::Or(vec![
                            ClassExpression::not(expr.clone()),
                            ClassExpression::Named(class.clone()),
                        ]));
                        let g = self.expr(&gci)?;
                        self.global.push((g, i));
                    }
                }
            }
            Axiom::DisjointClasses(a, b) => {
                let (ca, cb) = (self.class_ix[a], self.class_ix[b]);
                let not_b = self.expr(&ClassExpression::not(ClassExpression::Named(b.clone())))?;
                let not_a = self.expr(&ClassExpression::not(ClassExpression::Named(a.clone())))?;
                self.unfold[ca as usize].push((not_b, i));
                self.unfold[cb as usize].push((not_a, i));
            }
            Axiom::SubPropertyOf { sub, sup } => {
                let (r, s) = (role(self, sub), role(self, sup));
                self.set_sub(r, s);
                self.set_sub(r + 1, s + 1);
            }
            Axiom::InverseProperties(p, q) => {
                let (r, s) = (role(self, p), role(self, q));
                self.set_sub(r, s + 1);
                self.set_sub(s + 1, r);
                self.set_sub(s, r + 1);
                self.set_sub(r + 1, s);
            }
            Axiom::Domain { property, class } => {
                let e = self.expr(&ClassExpression::Named(class.clone()))?;
                self.domain[self.prop_ix[property] as usize].push((e, i));
            }
            Axiom::Range { property, class } => {
                let e = self.expr(&ClassExpression::Named(class.clone()))?;
                self.range[self.prop_ix[property] as usize].push((e, i));
            }
            Axiom::ClassAssertion { individual, class } => {
                let e = self.expr(&nnf(class))?;
                self.assertions.push((self.ind_ix[individual], e, i));
            }
            Axiom::PropertyAssertion { property, subject, object } => {
                self.links.push((self.ind_ix[subject], self.prop_ix[property], self.ind_ix[object], i));
            }
            Axiom::Declaration(_) => {}
        }
        Ok(())
    }

    fn set_sub(&mut self, r: Role, s: Role) {
        let n = 2 * self.props.len();
        self.sub[r as usize * n + s as usize] = true;
    }

    fn close_roles(&mut self) {
        let n = 2 * self.props.len();
        // Warshall
        for k in 0..n {
            for i in 0..n {
                if self.sub[i * n + k] {
                    for j in 0..n {
                        if self.sub[k * n + j] {
                            self.sub[i * n + j] = true;
                        }
                    }
                }
            }
        }
        self.sups = (0..n)
            .map(|r| (0..n as u32).filter(|&s| self.sub[r * n + s as usize]).collect())
            .collect();
    }

    pub fn is_sub(&self, r: Role, s: Role) -> bool {
        let n = 2 * self.props.len();
        self.sub[r as usize * n + s as usize]
    }

    pub fn role_expr(&self, r: Role) -> RoleExpression {
        let p = self.props[(r / 2) as usize].clone();
        if r % 2 == 0 {
            RoleExpression::Named(p)
        } else {
            RoleExpression::Inverse(p)
        }
    }

    fn role(&self, r: &RoleExpression) -> Role {
        2 * self.prop_ix[r.property()] + r.is_inverse() as u32
    }

    fn intern_expr(&mut self, e: Expr, ce: ClassExpression) -> ExprId {
        if let Some(&id) = self.intern.get(&e) {
            return id;
        }
        let id = self.exprs.len() as ExprId;
        self.exprs.push(e.clone());
        self.ces.push(ce);
        self.intern.insert(e, id);
        id
    }

    /// Interns an expression that is already in negation normal form.
    pub fn expr(&mut self, ce: &ClassExpression) -> Result<ExprId, TableauError> {
        use ClassExpression as CE;
        let e = match ce {
            CE::Top => Expr::Top,
            CE::Bottom => Expr::Bottom,
            CE::Named(c) => Expr::Name(self.class_ix[c]),
            CE::Not(inner) => match inner.as_ref() {
                CE::Named(c) => Expr::NotName(self.class_ix[c]),
                _ => return Err(TableauError::UnsupportedAxiom(format!("negated expression {ce}"))),
            },
            CE::And(es) => Expr::And(es.iter().map(|e| self.expr(e)).collect::<Result<_, _>>()?),
            CE::Or(es) => Expr::Or(es.iter().map(|e| self.expr(e)).collect::<Result<_, _>>()?),
            CE::Some(r, f) => {
                let f = self.expr(f)?;
                Expr::Some(self.role(r), f)
            }
            CE::Only(r, f) => {
                let f = self.expr(f)?;
                Expr::Only(self.role(r), f)
            }
            CE::AtMost(n, r, f) => {
                if **f != CE::Top {
                    return Err(TableauError::UnsupportedAxiom(format!("qualified cardinality {ce}")));
                }
                Expr::AtMost(*n, self.role(r))
            }
        };
        Ok(self.intern_expr(e, ce.clone()))
    }

    pub fn class_id(&self, c: &EntityName) -> Option<u32> {
        self.class_ix.get(c).copied()
    }

    /// Same knowledge base with one more individual asserted into `class`,
    /// as if `ClassAssertion(probe, class)` had been appended to the ontology.
    pub fn with_probe(&self, probe: &EntityName, class: u32, axiom: usize) -> Kb {
        let mut kb = self.clone();
        let ind = kb.individuals.len() as u32;
        kb.individuals.push(probe.clone());
        kb.ind_ix.insert(probe.clone(), ind);
        let e = kb.intern_expr(Expr::Name(class), ClassExpression::Named(kb.classes[class as usize].clone()));
        kb.name_expr[class as usize] = Some(e);
        kb.assertions.push((ind, e, axiom));
        kb
    }

    /// Expression id for `Name(class)`, interning it if needed.
    pub fn name_id(&mut self, class: u32) -> ExprId {
        let e = self.intern_expr(Expr::Name(class), ClassExpression::Named(self.classes[class as usize].clone()));
        self.name_expr[class as usize] = Some(e);
        e
    }
}
