#![allow(dead_code)]

use ontocheck_core::{Axiom, ClassExpression as CE, EntityName, Ontology, RoleExpression};
use proptest::prelude::*;

pub fn class() -> impl Strategy<Value = EntityName> {
    prop::sample::select(vec!["A", "B", "C"]).prop_map(EntityName::class)
}

pub fn property() -> impl Strategy<Value = EntityName> {
    prop::sample::select(vec!["r", "s"]).prop_map(EntityName::property)
}

pub fn individual() -> impl Strategy<Value = EntityName> {
    prop::sample::select(vec!["a", "b"]).prop_map(EntityName::individual)
}

pub fn role() -> impl Strategy<Value = RoleExpression> {
    (property(), any::<bool>()).prop_map(|(p, inv)| if inv { RoleExpression::Inverse(p) } else { RoleExpression::Named(p) })
}

/// Expressions without cardinalities, depth at most `depth`.
pub fn expr(depth: u32) -> BoxedStrategy<CE> {
    let leaf = prop_oneof![4 => class().prop_map(|c| CE::named(&c)), 1 => Just(CE::Top), 1 => Just(CE::Bottom)];
    leaf.prop_recursive(depth, 12, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(CE::not),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(CE::And),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(CE::Or),
            (role(), inner.clone()).prop_map(|(r, e)| CE::some(r, e)),
            (role(), inner).prop_map(|(r, e)| CE::only(r, e)),
        ]
    })
    .boxed()
}

/// Expressions that may also hold `max n` restrictions, including negated
/// ones; meant for the model layer, not the tableau.
pub fn full_expr(depth: u32) -> BoxedStrategy<CE> {
    let leaf = prop_oneof![4 => class().prop_map(|c| CE::named(&c)), 1 => Just(CE::Top), 1 => Just(CE::Bottom)];
    leaf.prop_recursive(depth, 12, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(CE::not),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(CE::And),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(CE::Or),
            (role(), inner.clone()).prop_map(|(r, e)| CE::some(r, e)),
            (role(), inner.clone()).prop_map(|(r, e)| CE::only(r, e)),
            (0u32..3, role(), inner).prop_map(|(n, r, e)| CE::at_most(n, r, e)),
        ]
    })
    .boxed()
}

/// Axioms inside the reasoner's fragment over at most six names.
pub fn axiom() -> impl Strategy<Value = Axiom> {
    prop_oneof![
        4 => (class(), expr(2)).prop_map(|(c, e)| Axiom::sub_class(&c, e)),
        1 => (class(), expr(1)).prop_map(|(c, e)| Axiom::EquivalentClasses { class: c, expr: e }),
        1 => (class(), class()).prop_filter("distinct", |(a, b)| a != b).prop_map(|(a, b)| Axiom::DisjointClasses(a, b)),
        1 => (class(), role()).prop_map(|(c, r)| Axiom::sub_class(&c, CE::at_most(1, r, CE::Top))),
        1 => (property(), property()).prop_map(|(p, q)| Axiom::SubPropertyOf { sub: p, sup: q }),
        1 => (property(), property()).prop_map(|(p, q)| Axiom::InverseProperties(p, q)),
        1 => (property(), class()).prop_map(|(p, c)| Axiom::Domain { property: p, class: c }),
        1 => (property(), class()).prop_map(|(p, c)| Axiom::Range { property: p, class: c }),
        2 => (individual(), expr(1)).prop_map(|(i, e)| Axiom::ClassAssertion { individual: i, class: e }),
        1 => (property(), individual(), individual())
            .prop_map(|(p, a, b)| Axiom::PropertyAssertion { property: p, subject: a, object: b }),
    ]
}

pub fn ontology(max_axioms: usize) -> impl Strategy<Value = Ontology> {
    prop::collection::vec(axiom(), 0..=max_axioms).prop_map(|ax| Ontology::new("http://example.org/onto", ax))
}

/// The university example: three classes, two properties, three people and courses.
pub fn university() -> Ontology {
    let c = EntityName::class;
    let p = EntityName::property;
    let i = EntityName::individual;
    Ontology::new(
        "university",
        vec![
            Axiom::Domain { property: p("teaches"), class: c("Professor") },
            Axiom::Range { property: p("teaches"), class: c("Course") },
            Axiom::Domain { property: p("enrolledIn"), class: c("Student") },
            Axiom::Range { property: p("enrolledIn"), class: c("Course") },
            Axiom::ClassAssertion { individual: i("Dr.Smith"), class: CE::named(&c("Professor")) },
            Axiom::ClassAssertion { individual: i("Alice"), class: CE::named(&c("Student")) },
            Axiom::ClassAssertion { individual: i("AICourse"), class: CE::named(&c("Course")) },
            Axiom::PropertyAssertion { property: p("teaches"), subject: i("Dr.Smith"), object: i("AICourse") },
            Axiom::PropertyAssertion { property: p("enrolledIn"), subject: i("Alice"), object: i("AICourse") },
        ],
    )
}
