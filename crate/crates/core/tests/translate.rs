use std::path::PathBuf;

use ontocheck_core::antipattern::{instance_fixture, AntiPatternId};
use ontocheck_core::translate::{estimate_tokens, to_levi, to_triples, Triple, TripleDoc, TokenEstimator, WordCount};
use ontocheck_core::{Axiom, ClassExpression as CE, EntityKind, EntityName, Ontology, RoleExpression};

fn every_form() -> Ontology {
    let c = |n: &str| EntityName::new(EntityKind::Class, &format!("http://example.org/onto#{n}")).unwrap();
    let p = |n: &str| EntityName::new(EntityKind::ObjectProperty, &format!("http://example.org/onto/{n}")).unwrap();
    let i = |n: &str| EntityName::new(EntityKind::Individual, &format!("urn:x:{n}")).unwrap();
    let r = RoleExpression::named(&p("teaches"));
    Ontology::new(
        "golden",
        vec![
            Axiom::Declaration(c("Course")),
            Axiom::Declaration(p("teaches")),
            Axiom::Declaration(i("alice")),
            Axiom::sub_class(&c("Professor"), CE::named(&c("Person"))),
            Axiom::sub_class(&c("Professor"), CE::some(r.clone(), CE::named(&c("Course")))),
            Axiom::sub_class(&c("Professor"), CE::only(r.clone(), CE::named(&c("Course")))),
            Axiom::sub_class(&c("Professor"), CE::at_most(1, r.clone(), CE::Top)),
            Axiom::sub_class(&c("Professor"), CE::at_most(2, r.clone(), CE::named(&c("Course")))),
            Axiom::sub_class(&c("Course"), CE::some(r.inverse(), CE::named(&c("Professor")))),
            Axiom::sub_class(
                &c("Student"),
                CE::some(
                    RoleExpression::named(&p("enrolledIn")),
                    CE::And(vec![CE::named(&c("Course")), CE::not(CE::named(&c("Seminar")))]),
                ),
            ),
            Axiom::sub_class(&c("Person"), CE::Or(vec![CE::named(&c("Student")), CE::named(&c("Professor")), CE::Bottom])),
            Axiom::EquivalentClasses { class: c("Lecturer"), expr: CE::named(&c("Professor")) },
            Axiom::DisjointClasses(c("Student"), c("Course")),
            Axiom::SubPropertyOf { sub: p("teaches"), sup: p("involvedIn") },
            Axiom::InverseProperties(p("teaches"), p("taughtBy")),
            Axiom::Domain { property: p("teaches"), class: c("Professor") },
            Axiom::Range { property: p("teaches"), class: c("Course") },
            Axiom::ClassAssertion { individual: i("alice"), class: CE::named(&c("Student")) },
            Axiom::ClassAssertion { individual: i("bob"), class: CE::some(r.clone(), CE::Top) },
            Axiom::PropertyAssertion { property: p("enrolledIn"), subject: i("alice"), object: i("AICourse") },
        ],
    )
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/renderings.txt")
}

#[test]
fn renderings_match_the_golden_file() {
    let doc = to_triples(&every_form());
    let text: String = doc.triples.iter().map(|t| format!("{} | {} | {}\n", t.subject, t.relation, t.object)).collect();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(golden_path(), &text).unwrap();
    }
    let want = std::fs::read_to_string(golden_path()).expect("golden file present");
    assert_eq!(text, want);
}

#[test]
fn no_prefixes_survive() {
    let mut docs = vec![to_triples(&every_form())];
    docs.extend(AntiPatternId::ALL.into_iter().map(|id| to_triples(&instance_fixture(id))));
    for d in docs {
        for t in &d.triples {
            for f in [&t.subject, &t.relation, &t.object] {
                assert!(!f.is_empty());
                assert!(!f.contains('#') && !f.contains("://") && !f.contains(':'), "{f}");
            }
        }
    }
}

#[test]
fn coverage_and_levi_degree() {
    let o = every_form();
    let d = to_triples(&o);
    assert!(d.triples.len() >= o.logical_axioms().count());
    assert_eq!(d.token_count, estimate_tokens(&d));
    let g = to_levi(&d);
    for (k, t) in d.triples.iter().enumerate() {
        let rel = format!("{}#{}", t.relation, k);
        let deg = g.edges.iter().filter(|(a, b)| *a == rel || *b == rel).count();
        assert_eq!(deg, 2);
    }
}

#[test]
fn token_count_is_monotone() {
    let d = to_triples(&every_form());
    let mut acc: Vec<Triple> = Vec::new();
    let mut last = 0;
    for t in d.triples {
        acc.push(t);
        let n = WordCount.estimate(&acc);
        assert!(n > last);
        last = n;
    }
    let empty = TripleDoc { id: "e".into(), triples: vec![], token_count: 0, label: None, pattern: None };
    assert_eq!(estimate_tokens(&empty), 0);
}
