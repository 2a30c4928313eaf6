//! Ontology data model: entities, class expressions, axioms and ontologies.
//!
//! Everything here is immutable once built and cheap to clone (names are
//! reference counted). Identity is always by full IRI; the local name is a
//! display convenience derived from the IRI.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Namespace used for unqualified names when a document declares none.
pub const DEFAULT_NAMESPACE: &str = "http://example.org/onto#";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed IRI {0:?}")]
    MalformedIri(String),
    #[error("IRI {0:?} has an empty local name")]
    EmptyLocalName(String),
    #[error("entity {name} used as {used:?} but declared as {declared:?}")]
    KindMismatch {
        name: String,
        used: EntityKind,
        declared: EntityKind,
    },
    #[error("{0} needs at least two operands")]
    TooFewOperands(&'static str),
    #[error("disjointness between {0} and itself")]
    SelfDisjoint(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKind {
    Class,
    ObjectProperty,
    Individual,
}

impl EntityKind {
    pub fn keyword(self) -> &'static str {
        match self {
            EntityKind::Class => "Class",
            EntityKind::ObjectProperty => "ObjectProperty",
            EntityKind::Individual => "Individual",
        }
    }
}

/// A named entity. `local` is the IRI with its namespace stripped.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityName {
    kind: EntityKind,
    iri: Arc<str>,
    local: Arc<str>,
}

impl EntityName {
    pub fn new(kind: EntityKind, iri: &str) -> Result<Self, ModelError> {
        if iri.is_empty() || iri.chars().any(|c| c.is_whitespace() || c == '<' || c == '>' || c == '"') {
            return Err(ModelError::MalformedIri(iri.to_string()));
        }
        let local = local_part(iri);
        if local.is_empty() {
            return Err(ModelError::EmptyLocalName(iri.to_string()));
        }
        Ok(EntityName {
            kind,
            local: Arc::from(local),
            iri: Arc::from(iri),
        })
    }

    /// Builds a name in [`DEFAULT_NAMESPACE`].
    ///
    /// Panics if `local` is not a valid local name; meant for fixtures and tests.
    pub fn in_default(kind: EntityKind, local: &str) -> Self {
        assert!(
            !local.is_empty() && !local.contains(['#', '/', ':']),
            "invalid local name {local:?}"
        );
        Self::new(kind, &format!("{DEFAULT_NAMESPACE}{local}")).expect("valid local name")
    }

    pub fn class(local: &str) -> Self {
        Self::in_default(EntityKind::Class, local)
    }

    pub fn property(local: &str) -> Self {
        Self::in_default(EntityKind::ObjectProperty, local)
    }

    pub fn individual(local: &str) -> Self {
        Self::in_default(EntityKind::Individual, local)
    }

    pub fn kind(&self) -> EntityKind {
        self.kind
    }

    pub fn iri(&self) -> &str {
        &self.iri
    }

    pub fn local(&self) -> &str {
        &self.local
    }

    /// The IRI with the local name removed.
    pub fn namespace(&self) -> &str {
        &self.iri[..self.iri.len() - self.local.len()]
    }

    pub fn with_kind(&self, kind: EntityKind) -> Self {
        EntityName {
            kind,
            iri: self.iri.clone(),
            local: self.local.clone(),
        }
    }
}

fn local_part(iri: &str) -> &str {
    for sep in ['#', '/', ':'] {
        if let Some(pos) = iri.rfind(sep) {
            return &iri[pos + 1..];
        }
    }
    iri
}

impl fmt::Debug for EntityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}({})", self.kind, self.local)
    }
}

impl fmt::Display for EntityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.local)
    }
}

/// An object property or its inverse. `Inverse(Inverse(r))` is never built.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RoleExpression {
    Named(EntityName),
    Inverse(EntityName),
}

impl RoleExpression {
    pub fn named(property: &EntityName) -> Self {
        RoleExpression::Named(property.clone())
    }

    pub fn property(&self) -> &EntityName {
        match self {
            RoleExpression::Named(p) | RoleExpression::Inverse(p) => p,
        }
    }

    pub fn is_inverse(&self) -> bool {
        matches!(self, RoleExpression::Inverse(_))
    }

    pub fn inverse(&self) -> Self {
        match self {
            RoleExpression::Named(p) => RoleExpression::Inverse(p.clone()),
            RoleExpression::Inverse(p) => RoleExpression::Named(p.clone()),
        }
    }
}

impl fmt::Display for RoleExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoleExpression::Named(p) => write!(f, "{p}"),
            RoleExpression::Inverse(p) => write!(f, "inverse {p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassExpression {
    Named(EntityName),
    Top,
    Bottom,
    Not(Box<ClassExpression>),
    And(Vec<ClassExpression>),
    Or(Vec<ClassExpression>),
    Some(RoleExpression, Box<ClassExpression>),
    Only(RoleExpression, Box<ClassExpression>),
    AtMost(u32, RoleExpression, Box<ClassExpression>),
}

impl ClassExpression {
    pub fn named(class: &EntityName) -> Self {
        ClassExpression::Named(class.clone())
    }

    pub fn not(inner: ClassExpression) -> Self {
        ClassExpression::Not(Box::new(inner))
    }

    pub fn some(role: RoleExpression, filler: ClassExpression) -> Self {
        ClassExpression::Some(role, Box::new(filler))
    }

    pub fn only(role: RoleExpression, filler: ClassExpression) -> Self {
        ClassExpression::Only(role, Box::new(filler))
    }

    pub fn at_most(n: u32, role: RoleExpression, filler: ClassExpression) -> Self {
        ClassExpression::AtMost(n, role, Box::new(filler))
    }

    pub fn as_named(&self) -> Option<&EntityName> {
        match self {
            ClassExpression::Named(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(
            self,
            ClassExpression::Named(_) | ClassExpression::Top | ClassExpression::Bottom
        )
    }

    /// Visits every entity name occurring in the expression, roles included.
    pub fn for_each_name(&self, f: &mut impl FnMut(&EntityName)) {
        match self {
            ClassExpression::Named(n) => f(n),
            ClassExpression::Top | ClassExpression::Bottom => {}
            ClassExpression::Not(e) => e.for_each_name(f),
            ClassExpression::And(es) | ClassExpression::Or(es) => {
                es.iter().for_each(|e| e.for_each_name(f))
            }
            ClassExpression::Some(r, e)
            | ClassExpression::Only(r, e)
            | ClassExpression::AtMost(_, r, e) => {
                f(r.property());
                e.for_each_name(f);
            }
        }
    }

    /// Named classes occurring anywhere in the expression, in first-seen order.
    pub fn named_classes(&self) -> Vec<EntityName> {
        let mut out = Vec::new();
        self.for_each_name(&mut |n| {
            if n.kind() == EntityKind::Class && !out.contains(n) {
                out.push(n.clone());
            }
        });
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            ClassExpression::Named(_) | ClassExpression::Top | ClassExpression::Bottom => 1,
            ClassExpression::Not(e) => 1 + e.depth(),
            ClassExpression::And(es) | ClassExpression::Or(es) => {
                1 + es.iter().map(|e| e.depth()).max().unwrap_or(0)
            }
            ClassExpression::Some(_, e)
            | ClassExpression::Only(_, e)
            | ClassExpression::AtMost(_, _, e) => 1 + e.depth(),
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        match self {
            ClassExpression::Named(n) => expect_kind(n, EntityKind::Class),
            ClassExpression::Top | ClassExpression::Bottom => Ok(()),
            ClassExpression::Not(e) => e.validate(),
            ClassExpression::And(es) | ClassExpression::Or(es) => {
                if es.len() < 2 {
                    let op = if matches!(self, ClassExpression::And(_)) { "and" } else { "or" };
                    return Err(ModelError::TooFewOperands(op));
                }
                es.iter().try_for_each(|e| e.validate())
            }
            ClassExpression::Some(r, e)
            | ClassExpression::Only(r, e)
            | ClassExpression::AtMost(_, r, e) => {
                expect_kind(r.property(), EntityKind::ObjectProperty)?;
                e.validate()
            }
        }
    }
}

impl fmt::Display for ClassExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(e: &ClassExpression, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if e.is_atomic() || matches!(e, ClassExpression::Not(_)) {
                write!(f, "{e}")
            } else {
                write!(f, "({e})")
            }
        }
        match self {
            ClassExpression::Named(n) => write!(f, "{n}"),
            ClassExpression::Top => f.write_str("owl:Thing"),
            ClassExpression::Bottom => f.write_str("owl:Nothing"),
            ClassExpression::Not(e) => {
                f.write_str("not ")?;
                operand(e, f)
            }
            ClassExpression::And(es) | ClassExpression::Or(es) => {
                let sep = if matches!(self, ClassExpression::And(_)) { " and " } else { " or " };
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    operand(e, f)?;
                }
                Ok(())
            }
            ClassExpression::Some(r, e) => {
                write!(f, "{r} some ")?;
                operand(e, f)
            }
            ClassExpression::Only(r, e) => {
                write!(f, "{r} only ")?;
                operand(e, f)
            }
            ClassExpression::AtMost(n, r, e) => {
                write!(f, "{r} max {n} ")?;
                operand(e, f)
            }
        }
    }
}

/// Negation normal form: negation only directly above named classes.
///
/// `not (r max 0 C)` becomes `r some C`; negated cardinalities above zero
/// have no counterpart in the grammar and are kept as `Not(AtMost(..))`.
pub fn nnf(expr: &ClassExpression) -> ClassExpression {
    use ClassExpression as CE;
    match expr {
        CE::Named(_) | CE::Top | CE::Bottom => expr.clone(),
        CE::And(es) => CE::And(es.iter().map(nnf).collect()),
        CE::Or(es) => CE::Or(es.iter().map(nnf).collect()),
        CE::Some(r, e) => CE::some(r.clone(), nnf(e)),
        CE::Only(r, e) => CE::only(r.clone(), nnf(e)),
        CE::AtMost(n, r, e) => CE::at_most(*n, r.clone(), nnf(e)),
        CE::Not(inner) => match inner.as_ref() {
            CE::Named(_) => expr.clone(),
            CE::Top => CE::Bottom,
            CE::Bottom => CE::Top,
            CE::Not(e) => nnf(e),
            CE::And(es) => CE::Or(es.iter().map(|e| nnf(&CE::not(e.clone()))).collect()),
            CE::Or(es) => CE::And(es.iter().map(|e| nnf(&CE::not(e.clone()))).collect()),
            CE::Some(r, e) => CE::only(r.clone(), nnf(&CE::not((**e).clone()))),
            CE::Only(r, e) => CE::some(r.clone(), nnf(&CE::not((**e).clone()))),
            CE::AtMost(0, r, e) => CE::some(r.clone(), nnf(e)),
            CE::AtMost(n, r, e) => CE::not(CE::at_most(*n, r.clone(), nnf(e))),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    SubClassOf { sub: EntityName, sup: ClassExpression },
    EquivalentClasses { class: EntityName, expr: ClassExpression },
    DisjointClasses(EntityName, EntityName),
    SubPropertyOf { sub: EntityName, sup: EntityName },
    InverseProperties(EntityName, EntityName),
    Domain { property: EntityName, class: EntityName },
    Range { property: EntityName, class: EntityName },
    ClassAssertion { individual: EntityName, class: ClassExpression },
    PropertyAssertion { property: EntityName, subject: EntityName, object: EntityName },
    Declaration(EntityName),
}

/// Which box an axiom belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxiomBox {
    Assertional,
    Terminological,
    Role,
    Declaration,
}

impl Axiom {
    pub fn sub_class(sub: &EntityName, sup: ClassExpression) -> Self {
        Axiom::SubClassOf { sub: sub.clone(), sup }
    }

    pub fn kind_box(&self) -> AxiomBox {
        match self {
            Axiom::ClassAssertion { .. } | Axiom::PropertyAssertion { .. } => AxiomBox::Assertional,
            Axiom::SubPropertyOf { .. } | Axiom::InverseProperties(..) => AxiomBox::Role,
            Axiom::Declaration(_) => AxiomBox::Declaration,
            _ => AxiomBox::Terminological,
        }
    }

    pub fn is_declaration(&self) -> bool {
        matches!(self, Axiom::Declaration(_))
    }

    pub fn for_each_name(&self, f: &mut impl FnMut(&EntityName)) {
        match self {
            Axiom::SubClassOf { sub, sup } => {
                f(sub);
                sup.for_each_name(f);
            }
            Axiom::EquivalentClasses { class, expr } => {
                f(class);
                expr.for_each_name(f);
            }
            Axiom::DisjointClasses(a, b)
            | Axiom::InverseProperties(a, b)
            | Axiom::SubPropertyOf { sub: a, sup: b }
            | Axiom::Domain { property: a, class: b }
            | Axiom::Range { property: a, class: b } => {
                f(a);
                f(b);
            }
            Axiom::ClassAssertion { individual, class } => {
                f(individual);
                class.for_each_name(f);
            }
            Axiom::PropertyAssertion { property, subject, object } => {
                f(property);
                f(subject);
                f(object);
            }
            Axiom::Declaration(n) => f(n),
        }
    }

    pub fn names(&self) -> BTreeSet<EntityName> {
        let mut out = BTreeSet::new();
        self.for_each_name(&mut |n| {
            out.insert(n.clone());
        });
        out
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        use EntityKind::*;
        match self {
            Axiom::SubClassOf { sub, sup } => {
                expect_kind(sub, Class)?;
                sup.validate()
            }
            Axiom::EquivalentClasses { class, expr } => {
                expect_kind(class, Class)?;
                expr.validate()
            }
            Axiom::DisjointClasses(a, b) => {
                expect_kind(a, Class)?;
                expect_kind(b, Class)?;
                if a == b {
                    return Err(ModelError::SelfDisjoint(a.local().to_string()));
                }
                Ok(())
            }
            Axiom::SubPropertyOf { sub: a, sup: b } | Axiom::InverseProperties(a, b) => {
                expect_kind(a, ObjectProperty)?;
                expect_kind(b, ObjectProperty)
            }
            Axiom::Domain { property, class } | Axiom::Range { property, class } => {
                expect_kind(property, ObjectProperty)?;
                expect_kind(class, Class)
            }
            Axiom::ClassAssertion { individual, class } => {
                expect_kind(individual, Individual)?;
                class.validate()
            }
            Axiom::PropertyAssertion { property, subject, object } => {
                expect_kind(property, ObjectProperty)?;
                expect_kind(subject, Individual)?;
                expect_kind(object, Individual)
            }
            Axiom::Declaration(_) => Ok(()),
        }
    }
}

fn expect_kind(name: &EntityName, kind: EntityKind) -> Result<(), ModelError> {
    if name.kind() == kind {
        Ok(())
    } else {
        Err(ModelError::KindMismatch {
            name: name.iri().to_string(),
            used: kind,
            declared: name.kind(),
        })
    }
}

/// The three semantic outcomes of checking an ontology.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OntologyStatus {
    ConsistentCoherent,
    /// Consistent, but these named classes can have no instances. Never empty.
    Incoherent(Vec<EntityName>),
    Inconsistent(String),
}

impl OntologyStatus {
    pub fn label(&self) -> &'static str {
        match self {
            OntologyStatus::ConsistentCoherent => "consistent",
            OntologyStatus::Incoherent(_) => "incoherent",
            OntologyStatus::Inconsistent(_) => "inconsistent",
        }
    }

    pub fn is_consistent_coherent(&self) -> bool {
        matches!(self, OntologyStatus::ConsistentCoherent)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Ontology {
    pub id: String,
    pub axioms: Vec<Axiom>,
}

/// Axioms split by box; declarations are left out.
#[derive(Debug, Default)]
pub struct BoxPartition<'a> {
    pub abox: Vec<&'a Axiom>,
    pub tbox: Vec<&'a Axiom>,
    pub rbox: Vec<&'a Axiom>,
}

impl Ontology {
    pub fn new(id: impl Into<String>, axioms: Vec<Axiom>) -> Self {
        Ontology { id: id.into(), axioms }
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    pub fn signature(&self) -> BTreeSet<EntityName> {
        signature_of(self)
    }

    pub fn names_of_kind(&self, kind: EntityKind) -> Vec<EntityName> {
        self.signature().into_iter().filter(|n| n.kind() == kind).collect()
    }

    pub fn classes(&self) -> Vec<EntityName> {
        self.names_of_kind(EntityKind::Class)
    }

    pub fn properties(&self) -> Vec<EntityName> {
        self.names_of_kind(EntityKind::ObjectProperty)
    }

    pub fn individuals(&self) -> Vec<EntityName> {
        self.names_of_kind(EntityKind::Individual)
    }

    pub fn partition(&self) -> BoxPartition<'_> {
        partition_abox_tbox_rbox(self)
    }

    pub fn logical_axioms(&self) -> impl Iterator<Item = &Axiom> {
        self.axioms.iter().filter(|a| !a.is_declaration())
    }

    pub fn declared(&self) -> BTreeSet<EntityName> {
        self.axioms
            .iter()
            .filter_map(|a| match a {
                Axiom::Declaration(n) => Some(n.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn contains(&self, axiom: &Axiom) -> bool {
        self.axioms.contains(axiom)
    }

    /// Appends declarations for every name that is used but not declared.
    pub fn with_declarations(mut self) -> Self {
        let declared = self.declared();
        let missing: Vec<_> = self
            .signature()
            .into_iter()
            .filter(|n| !declared.contains(n))
            .map(Axiom::Declaration)
            .collect();
        self.axioms.extend(missing);
        self
    }

    /// Same id, same logical axioms in the same order, same declared names.
    pub fn same_content(&self, other: &Ontology) -> bool {
        self.id == other.id
            && self.logical_axioms().eq(other.logical_axioms())
            && self.declared() == other.declared()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.axioms.iter().try_for_each(Axiom::validate)?;
        // one kind per IRI
        let mut seen: std::collections::HashMap<&str, EntityKind> = Default::default();
        for n in self.signature().iter() {
            if let Some(prev) = seen.insert(n.iri(), n.kind()) {
                if prev != n.kind() {
                    return Err(ModelError::KindMismatch {
                        name: n.iri().to_string(),
                        used: n.kind(),
                        declared: prev,
                    });
                }
            }
        }
        Ok(())
    }
}

pub fn signature_of(o: &Ontology) -> BTreeSet<EntityName> {
    let mut out = BTreeSet::new();
    for a in &o.axioms {
        a.for_each_name(&mut |n| {
            out.insert(n.clone());
        });
    }
    out
}

pub fn partition_abox_tbox_rbox(o: &Ontology) -> BoxPartition<'_> {
    let mut p = BoxPartition::default();
    for a in &o.axioms {
        match a.kind_box() {
            AxiomBox::Assertional => p.abox.push(a),
            AxiomBox::Terminological => p.tbox.push(a),
            AxiomBox::Role => p.rbox.push(a),
            AxiomBox::Declaration => {}
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use ClassExpression as CE;

    fn c(n: &str) -> CE {
        CE::Named(EntityName::class(n))
    }

    fn r(n: &str) -> RoleExpression {
        RoleExpression::Named(EntityName::property(n))
    }

    #[test]
    fn local_names_strip_namespace() {
        let n = EntityName::new(EntityKind::Class, "http://purl.obolibrary.org/obo/GO_0001").unwrap();
        assert_eq!(n.local(), "GO_0001");
        assert_eq!(n.namespace(), "http://purl.obolibrary.org/obo/");
        let n = EntityName::new(EntityKind::Individual, "urn:x:Dr.Smith").unwrap();
        assert_eq!(n.local(), "Dr.Smith");
        assert!(EntityName::new(EntityKind::Class, "http://x.org/a#").is_err());
        assert!(EntityName::new(EntityKind::Class, "has space").is_err());
    }

    #[test]
    fn identity_is_by_iri() {
        let a = EntityName::new(EntityKind::Class, "http://a.org/x#Cell").unwrap();
        let b = EntityName::new(EntityKind::Class, "http://b.org/y#Cell").unwrap();
        assert_eq!(a.local(), b.local());
        assert_ne!(a, b);
    }

    #[test]
    fn inverse_collapses() {
        let role = r("p");
        assert_eq!(role.inverse().inverse(), role);
        assert!(role.inverse().is_inverse());
    }

    #[test]
    fn nnf_de_morgan() {
        let e = CE::not(CE::And(vec![c("A"), c("B")]));
        assert_eq!(nnf(&e), CE::Or(vec![CE::not(c("A")), CE::not(c("B"))]));
    }

    #[test]
    fn nnf_quantifier_duality() {
        let e = CE::not(CE::only(r("R"), c("C")));
        assert_eq!(nnf(&e), CE::some(r("R"), CE::not(c("C"))));
        let e = CE::not(CE::some(r("R"), c("C")));
        assert_eq!(nnf(&e), CE::only(r("R"), CE::not(c("C"))));
    }

    #[test]
    fn nnf_identity_on_atoms() {
        assert_eq!(nnf(&c("A")), c("A"));
        assert_eq!(nnf(&CE::not(CE::Top)), CE::Bottom);
        assert_eq!(nnf(&CE::not(CE::not(c("A")))), c("A"));
    }

    #[test]
    fn nnf_negated_cardinality() {
        let zero = CE::not(CE::at_most(0, r("R"), CE::Top));
        assert_eq!(nnf(&zero), CE::some(r("R"), CE::Top));
        let one = CE::not(CE::at_most(1, r("R"), CE::Top));
        assert_eq!(nnf(&one), one);
    }

    #[test]
    fn signature_of_single_subclass() {
        let o = Ontology::new(
            "t",
            vec![Axiom::sub_class(&EntityName::class("Professor"), c("Person"))],
        );
        let sig: Vec<_> = o.signature().into_iter().collect();
        assert_eq!(sig, vec![EntityName::class("Person"), EntityName::class("Professor")]);
        assert!(Ontology::default().signature().is_empty());
    }

    #[test]
    fn partition_counts() {
        let a = EntityName::individual("a");
        let b = EntityName::individual("b");
        let p = EntityName::property("p");
        let q = EntityName::property("q");
        let o = Ontology::new(
            "mixed",
            vec![
                Axiom::ClassAssertion { individual: a.clone(), class: c("C") },
                Axiom::SubPropertyOf { sub: p.clone(), sup: q.clone() },
                Axiom::sub_class(&EntityName::class("C"), c("D")),
                Axiom::PropertyAssertion { property: p.clone(), subject: a, object: b },
                Axiom::DisjointClasses(EntityName::class("C"), EntityName::class("E")),
                Axiom::Declaration(p),
            ],
        );
        let part = o.partition();
        assert_eq!((part.abox.len(), part.tbox.len(), part.rbox.len()), (2, 2, 1));
        assert_eq!(part.abox.len() + part.tbox.len() + part.rbox.len(), 5);
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        let a = EntityName::class("A");
        let o = Ontology::new("bad", vec![Axiom::DisjointClasses(a.clone(), a.clone())]);
        assert!(o.validate().is_err());
        let o = Ontology::new("bad", vec![Axiom::sub_class(&a, CE::And(vec![c("B")]))]);
        assert!(o.validate().is_err());
        let wrong = EntityName::property("A");
        let o = Ontology::new(
            "bad",
            vec![Axiom::sub_class(&a, c("B")), Axiom::Declaration(wrong)],
        );
        assert!(matches!(o.validate(), Err(ModelError::KindMismatch { .. })));
    }

    #[test]
    fn with_declarations_covers_signature() {
        let o = Ontology::new("t", vec![Axiom::sub_class(&EntityName::class("A"), c("B"))])
            .with_declarations();
        assert_eq!(o.declared(), o.signature());
    }
}
