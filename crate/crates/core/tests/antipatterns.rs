use std::collections::{BTreeMap, BTreeSet};

use ontocheck_core::antipattern::{
    canonical, detect, detect_pattern, find_injection_sites, inject, instance_fixture, instantiate, normalize,
    partial_fixture, AntiPatternId, ExpectedStatus, MatchBinding, Var,
};
use ontocheck_core::tableau::{classify_status, oracle_status};
use ontocheck_core::{Axiom, ClassExpression as CE, EntityKind, EntityName, Ontology, OntologyStatus, RoleExpression};
use proptest::prelude::*;

fn c(n: &str) -> EntityName {
    EntityName::class(n)
}

fn r(n: &str) -> RoleExpression {
    RoleExpression::named(&EntityName::property(n))
}

fn status_kind(s: &OntologyStatus) -> ExpectedStatus {
    match s {
        OntologyStatus::ConsistentCoherent => ExpectedStatus::ConsistentCoherent,
        OntologyStatus::Incoherent(_) => ExpectedStatus::Incoherent,
        OntologyStatus::Inconsistent(_) => ExpectedStatus::Inconsistent,
    }
}

#[test]
fn status_table_is_confirmed_by_the_oracle_and_the_tableau() {
    for id in AntiPatternId::ALL {
        let o = instance_fixture(id);
        let oracle = oracle_status(&o, 3).unwrap();
        assert_eq!(status_kind(&oracle), id.expected_status(), "{id}: oracle says {oracle:?}");
        let tab = classify_status(&o).unwrap();
        assert_eq!(status_kind(&tab), status_kind(&oracle), "{id}");
        if let (OntologyStatus::Incoherent(a), OntologyStatus::Incoherent(b)) = (&tab, &oracle) {
            assert_eq!(a, b, "{id}");
        }
    }
}

#[test]
fn eid_example() {
    let o = Ontology::new(
        "eid",
        vec![
            Axiom::EquivalentClasses { class: c("c1"), expr: CE::named(&c("c2")) },
            Axiom::DisjointClasses(c("c1"), c("c2")),
        ],
    );
    let found = detect(&o);
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].0, AntiPatternId::EID);
    assert_eq!(found[0].1.get(Var::C1), &c("c1"));
    assert_eq!(found[0].1.get(Var::C2), &c("c2"));
    assert!(detect(&Ontology::default()).is_empty());
}

#[test]
fn oil_with_two_disjoint_pairs_sharing_a_universal() {
    let o = Ontology::new(
        "oil",
        vec![
            Axiom::sub_class(&c("A"), CE::only(r("R"), CE::named(&c("X")))),
            Axiom::sub_class(&c("A"), CE::only(r("R"), CE::named(&c("Y")))),
            Axiom::sub_class(&c("A"), CE::only(r("R"), CE::named(&c("Z")))),
            Axiom::DisjointClasses(c("X"), c("Y")),
            Axiom::DisjointClasses(c("Z"), c("X")),
            Axiom::sub_class(&c("B"), CE::named(&c("A"))),
        ],
    );
    let found = detect_pattern(&o, AntiPatternId::OIL);
    assert_eq!(found, brute_force(&o, AntiPatternId::OIL));
    assert_eq!(found.len(), 2);
}

#[test]
fn injection_site_examples() {
    let ue = Ontology::new(
        "ue",
        vec![Axiom::sub_class(&c("c1"), CE::only(r("R"), CE::named(&c("c2")))), Axiom::DisjointClasses(c("c2"), c("c3"))],
    );
    let sites = find_injection_sites(&ue, AntiPatternId::UE, 1);
    let t = AntiPatternId::UE.template();
    let missing: Vec<Vec<Axiom>> = sites.iter().map(|b| b.missing_axioms(&t)).collect();
    assert!(missing.contains(&vec![Axiom::sub_class(&c("c1"), CE::some(r("R"), CE::named(&c("c3"))))]));

    let only_disj = Ontology::new("d", vec![Axiom::DisjointClasses(c("c2"), c("c3")), Axiom::Declaration(EntityName::property("R"))]);
    assert!(find_injection_sites(&only_disj, AntiPatternId::UE, 1).is_empty());
    let two = find_injection_sites(&only_disj, AntiPatternId::UE, 2);
    assert!(!two.is_empty());
    assert!(two.iter().all(|b| b.missing == vec![0, 1]));

    let no_disj = Ontology::new("n", vec![Axiom::sub_class(&c("a"), CE::named(&c("b")))]);
    assert!(find_injection_sites(&no_disj, AntiPatternId::EID, 1).is_empty());
}

#[test]
fn one_axiom_completion_of_every_partial_fixture() {
    for id in AntiPatternId::ALL {
        let o = partial_fixture(id);
        let (o2, rep) = inject(&o, id, 11).unwrap();
        assert_eq!(rep.injected_axioms.len(), 1, "{id}");
        assert!(detect(&o2).iter().any(|(p, _)| *p == id), "{id}");
        assert_eq!(status_kind(&classify_status(&o2).unwrap()), id.expected_status(), "{id}");
    }
}

/// Every substitution over the signature, checked axiom by axiom.
fn brute_force(o: &Ontology, id: AntiPatternId) -> Vec<MatchBinding> {
    let t = id.template();
    let present: BTreeSet<Axiom> = o.logical_axioms().map(normalize).collect();
    let vars = t.vars();
    let mut out = BTreeSet::new();
    let mut stack: Vec<BTreeMap<Var, EntityName>> = vec![BTreeMap::new()];
    for v in &vars {
        let pool: Vec<EntityName> = o.signature().into_iter().filter(|n| n.kind() == v.kind()).collect();
        stack = stack
            .into_iter()
            .flat_map(|s| {
                pool.iter().map(move |n| {
                    let mut e = s.clone();
                    e.insert(*v, n.clone());
                    e
                })
            })
            .collect();
    }
    for s in stack {
        if t.distinct.iter().any(|(x, y)| s[x] == s[y]) {
            continue;
        }
        if t.schemata.iter().all(|x| present.contains(&normalize(&instantiate(x, &s)))) {
            out.insert(canonical(&t, &s));
        }
    }
    out.into_iter()
        .map(|substitution| MatchBinding { substitution, matched: (0..t.arity()).collect(), missing: vec![] })
        .collect()
}

fn small_axiom() -> impl Strategy<Value = Axiom> {
    let cls = prop::sample::select(vec!["A", "B", "C", "D"]).prop_map(c);
    let role = prop::sample::select(vec!["r", "s"]).prop_map(EntityName::property);
    let ind = prop::sample::select(vec!["i", "j"]).prop_map(EntityName::individual);
    prop_oneof![
        (cls.clone(), cls.clone()).prop_map(|(a, b)| Axiom::sub_class(&a, CE::named(&b))),
        (cls.clone(), cls.clone()).prop_map(|(a, b)| Axiom::DisjointClasses(a, b)),
        (cls.clone(), cls.clone()).prop_map(|(a, b)| Axiom::EquivalentClasses { class: a, expr: CE::named(&b) }),
        (cls.clone(), role.clone(), cls.clone())
            .prop_map(|(a, p, b)| Axiom::sub_class(&a, CE::only(RoleExpression::named(&p), CE::named(&b)))),
        (cls.clone(), role.clone(), cls.clone(), any::<bool>()).prop_map(|(a, p, b, inv)| {
            let rr = if inv { RoleExpression::Inverse(p) } else { RoleExpression::Named(p) };
            Axiom::sub_class(&a, CE::some(rr, CE::named(&b)))
        }),
        (cls.clone(), role.clone(), cls.clone(), cls.clone()).prop_map(|(a, p, b, d)| Axiom::sub_class(
            &a,
            CE::some(RoleExpression::named(&p), CE::And(vec![CE::named(&b), CE::named(&d)]))
        )),
        (cls.clone(), role.clone())
            .prop_map(|(a, p)| Axiom::sub_class(&a, CE::at_most(1, RoleExpression::named(&p), CE::Top))),
        (role.clone(), role.clone()).prop_map(|(p, q)| Axiom::SubPropertyOf { sub: p, sup: q }),
        (role.clone(), cls.clone()).prop_map(|(p, a)| Axiom::Domain { property: p, class: a }),
        (role.clone(), cls.clone()).prop_map(|(p, a)| Axiom::Range { property: p, class: a }),
        (role, ind.clone(), ind.clone())
            .prop_map(|(p, a, b)| Axiom::PropertyAssertion { property: p, subject: a, object: b }),
        (ind, cls).prop_map(|(i, a)| Axiom::ClassAssertion { individual: i, class: CE::named(&a) }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn detection_matches_brute_force(axioms in prop::collection::vec(small_axiom(), 0..=10)) {
        let o = Ontology::new("p", axioms);
        for id in AntiPatternId::ALL {
            prop_assert_eq!(detect_pattern(&o, id), brute_force(&o, id), "{}", id);
        }
    }

    #[test]
    fn injection_completes_and_is_minimal(axioms in prop::collection::vec(small_axiom(), 1..=10), seed in any::<u64>()) {
        let o = Ontology::new("p", axioms);
        for id in AntiPatternId::ALL {
            if let Ok((o2, rep)) = inject(&o, id, seed) {
                prop_assert!((1..=2).contains(&rep.injected_axioms.len()));
                prop_assert_eq!(&o2.axioms[..o.axioms.len()], &o.axioms[..]);
                let after = detect_pattern(&o2, id);
                prop_assert!(after.iter().any(|b| b.substitution == rep.binding.substitution), "{}", id);
                // dropping the injected axioms removes the new instance again
                let before = detect_pattern(&o, id);
                prop_assert!(!before.iter().any(|b| b.substitution == rep.binding.substitution));
            }
        }
    }
}

#[test]
fn names_are_typed() {
    for id in AntiPatternId::ALL {
        for v in id.template().vars() {
            let k = v.kind();
            assert!(matches!(k, EntityKind::Class | EntityKind::ObjectProperty | EntityKind::Individual));
        }
    }
}
