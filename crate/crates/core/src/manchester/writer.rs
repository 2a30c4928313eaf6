use std::collections::BTreeMap;
use std::fmt::Write;

use super::lexer::is_name_char;
use super::OWL_NAMESPACE;
use crate::model::{Axiom, ClassExpression, EntityKind, EntityName, Ontology, RoleExpression, DEFAULT_NAMESPACE};

const RESERVED: &[&str] = &["and", "or", "not", "some", "only", "max", "inverse"];

/// Renders an ontology as Manchester syntax.
///
/// Axiom order is preserved. Parsing the output gives back an ontology with
/// the same content whenever every frame subject is declared (see
/// [`Ontology::with_declarations`]), since opening a frame declares its subject.
pub fn serialize(o: &Ontology) -> String {
    let ns = default_namespace(o);
    let names = Names { ns: &ns };
    let mut out = String::new();
    let _ = writeln!(out, "Prefix: : <{ns}>");
    let _ = writeln!(out, "Prefix: owl: <{OWL_NAMESPACE}>");
    if o.id.is_empty() {
        out.push_str("Ontology:\n");
    } else {
        let _ = writeln!(out, "Ontology: <{}>", o.id);
    }
    let mut open: Option<(EntityKind, &EntityName)> = None;
    for axiom in &o.axioms {
        let (kind, subject, clause) = frame_of(axiom, &names);
        let same = open.map_or(false, |(k, s)| k == kind && s == subject);
        if axiom.is_declaration() || !same {
            let _ = write!(out, "\n{}: {}\n", kind.keyword(), names.name(subject));
            open = Some((kind, subject));
        }
        if let Some(clause) = clause {
            let _ = writeln!(out, "    {clause}");
        }
    }
    out
}

fn frame_of<'a>(axiom: &'a Axiom, names: &Names) -> (EntityKind, &'a EntityName, Option<String>) {
    use EntityKind::*;
    match axiom {
        Axiom::SubClassOf { sub, sup } => (Class, sub, Some(format!("SubClassOf: {}", names.expr(sup)))),
        Axiom::EquivalentClasses { class, expr } => {
            (Class, class, Some(format!("EquivalentTo: {}", names.expr(expr))))
        }
        Axiom::DisjointClasses(a, b) => (Class, a, Some(format!("DisjointWith: {}", names.name(b)))),
        Axiom::SubPropertyOf { sub, sup } => {
            (ObjectProperty, sub, Some(format!("SubPropertyOf: {}", names.name(sup))))
        }
        Axiom::InverseProperties(a, b) => (ObjectProperty, a, Some(format!("InverseOf: {}", names.name(b)))),
        Axiom::Domain { property, class } => {
            (ObjectProperty, property, Some(format!("Domain: {}", names.name(class))))
        }
        Axiom::Range { property, class } => {
            (ObjectProperty, property, Some(format!("Range: {}", names.name(class))))
        }
        Axiom::ClassAssertion { individual, class } => {
            (Individual, individual, Some(format!("Types: {}", names.expr(class))))
        }
        Axiom::PropertyAssertion { property, subject, object } => (
            Individual,
            subject,
            Some(format!("Facts: {} {}", names.name(property), names.name(object))),
        ),
        Axiom::Declaration(n) => (n.kind(), n, None),
    }
}

/// Most frequent namespace in the signature, ties broken lexicographically.
fn default_namespace(o: &Ontology) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let sig = o.signature();
    for n in &sig {
        *counts.entry(n.namespace()).or_default() += 1;
    }
    let best = counts.iter().fold(None, |best: Option<(&str, usize)>, (ns, c)| match best {
        Some((_, bc)) if bc >= *c => best,
        _ => Some((ns, *c)),
    });
    best.map_or_else(|| DEFAULT_NAMESPACE.to_string(), |(ns, _)| ns.to_string())
}

struct Names<'a> {
    ns: &'a str,
}

impl Names<'_> {
    fn name(&self, n: &EntityName) -> String {
        let local = n.local();
        let safe = n.namespace() == self.ns
            && local.chars().all(is_name_char)
            && !local.bytes().all(|b| b.is_ascii_digit())
            && !RESERVED.contains(&local);
        if safe {
            local.to_string()
        } else {
            format!("<{}>", n.iri())
        }
    }

    fn role(&self, r: &RoleExpression) -> String {
        match r {
            RoleExpression::Named(p) => self.name(p),
            RoleExpression::Inverse(p) => format!("inverse {}", self.name(p)),
        }
    }

    fn operand(&self, e: &ClassExpression) -> String {
        if e.is_atomic() || matches!(e, ClassExpression::Not(_)) {
            self.expr(e)
        } else {
            format!("({})", self.expr(e))
        }
    }

    fn expr(&self, e: &ClassExpression) -> String {
        use ClassExpression as CE;
        match e {
            CE::Named(n) => self.name(n),
            CE::Top => "owl:Thing".to_string(),
            CE::Bottom => "owl:Nothing".to_string(),
            CE::Not(inner) => format!("not {}", self.operand(inner)),
            CE::And(es) => es.iter().map(|e| self.operand(e)).collect::<Vec<_>>().join(" and "),
            CE::Or(es) => es.iter().map(|e| self.operand(e)).collect::<Vec<_>>().join(" or "),
            CE::Some(r, f) => format!("{} some {}", self.role(r), self.operand(f)),
            CE::Only(r, f) => format!("{} only {}", self.role(r), self.operand(f)),
            CE::AtMost(n, r, f) => format!("{} max {n} {}", self.role(r), self.operand(f)),
        }
    }
}
