//! The fourteen inconsistency anti-patterns: templates, detection and
//! injection.
//!
//! A template is a short list of axiom schemata over variables. Detection
//! unifies every schema with an axiom of the ontology; injection looks for
//! instances that are one or two axioms short and appends what is missing.

mod matcher;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Axiom, ClassExpression, EntityKind, EntityName, Ontology, RoleExpression};

pub use matcher::{canonical, detect, detect_pattern, find_injection_sites, injection_sites, normalize, SiteIter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[allow(non_camel_case_types)]
pub enum AntiPatternId {
    AIO,
    EID,
    OIL,
    OILWI,
    OILWPI,
    UE,
    UEWI_1,
    UEWI_2,
    UEWPI,
    UEWIP,
    SOSINETO,
    OOD,
    OOR,
    CSC,
}

impl AntiPatternId {
    pub const ALL: [AntiPatternId; 14] = [
        AntiPatternId::AIO,
        AntiPatternId::EID,
        AntiPatternId::OIL,
        AntiPatternId::OILWI,
        AntiPatternId::OILWPI,
        AntiPatternId::UE,
        AntiPatternId::UEWI_1,
        AntiPatternId::UEWI_2,
        AntiPatternId::UEWPI,
        AntiPatternId::UEWIP,
        AntiPatternId::SOSINETO,
        AntiPatternId::OOD,
        AntiPatternId::OOR,
        AntiPatternId::CSC,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AntiPatternId::AIO => "AIO",
            AntiPatternId::EID => "EID",
            AntiPatternId::OIL => "OIL",
            AntiPatternId::OILWI => "OILWI",
            AntiPatternId::OILWPI => "OILWPI",
            AntiPatternId::UE => "UE",
            AntiPatternId::UEWI_1 => "UEWI_1",
            AntiPatternId::UEWI_2 => "UEWI_2",
            AntiPatternId::UEWPI => "UEWPI",
            AntiPatternId::UEWIP => "UEWIP",
            AntiPatternId::SOSINETO => "SOSINETO",
            AntiPatternId::OOD => "OOD",
            AntiPatternId::OOR => "OOR",
            AntiPatternId::CSC => "CSC",
        }
    }

    pub fn family(self) -> Family {
        use AntiPatternId::*;
        match self {
            AIO => Family::AIO,
            EID => Family::EID,
            OIL | OILWI | OILWPI => Family::OIL,
            UE | UEWI_1 | UEWI_2 | UEWPI | UEWIP => Family::UE,
            SOSINETO => Family::SOSINETO,
            OOD | OOR => Family::OO,
            CSC => Family::CSC,
        }
    }

    pub fn template(self) -> PatternTemplate {
        template(self)
    }

    /// Status any ontology containing an instance must have, as confirmed by
    /// exhaustive model search on the minimal instances.
    pub fn expected_status(self) -> ExpectedStatus {
        use AntiPatternId::*;
        match self {
            OOD | OOR => ExpectedStatus::Inconsistent,
            AIO | EID | UE | UEWI_2 | UEWPI | UEWIP | SOSINETO => ExpectedStatus::Incoherent,
            OIL | OILWI | OILWPI | UEWI_1 | CSC => ExpectedStatus::ConsistentCoherent,
        }
    }

    /// Whether an instance forces the ontology away from ConsistentCoherent.
    pub fn is_semantic(self) -> bool {
        self.expected_status() != ExpectedStatus::ConsistentCoherent
    }
}

impl fmt::Display for AntiPatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl serde::Serialize for AntiPatternId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> serde::Deserialize<'de> for AntiPatternId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown anti-pattern {0:?}")]
pub struct UnknownPattern(pub String);

impl FromStr for AntiPatternId {
    type Err = UnknownPattern;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        let norm = match norm.as_str() {
            "UEWI1" => "UEWI_1".to_string(),
            "UEWI2" => "UEWI_2".to_string(),
            _ => norm,
        };
        AntiPatternId::ALL
            .into_iter()
            .find(|p| p.name() == norm)
            .ok_or_else(|| UnknownPattern(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    AIO,
    EID,
    OIL,
    UE,
    SOSINETO,
    OO,
    CSC,
}

impl Family {
    pub const ALL: [Family; 7] =
        [Family::AIO, Family::EID, Family::OIL, Family::UE, Family::SOSINETO, Family::OO, Family::CSC];

    pub fn name(self) -> &'static str {
        match self {
            Family::AIO => "AIO",
            Family::EID => "EID",
            Family::OIL => "OIL*",
            Family::UE => "UE*",
            Family::SOSINETO => "SOSINETO",
            Family::OO => "OO*",
            Family::CSC => "CSC",
        }
    }

    pub fn members(self) -> Vec<AntiPatternId> {
        AntiPatternId::ALL.into_iter().filter(|p| p.family() == self).collect()
    }
}

impl FromStr for Family {
    type Err = UnknownPattern;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_uppercase();
        let t = t.trim_end_matches('*');
        Family::ALL
            .into_iter()
            .find(|f| f.name().trim_end_matches('*') == t)
            .ok_or_else(|| UnknownPattern(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectedStatus {
    ConsistentCoherent,
    Incoherent,
    Inconsistent,
}

/// Template variables. Class variables c1..c4, roles R, R1, R2 and
/// individuals a, b.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    C1,
    C2,
    C3,
    C4,
    R,
    R1,
    R2,
    A,
    B,
}

impl Var {
    pub fn kind(self) -> EntityKind {
        match self {
            Var::C1 | Var::C2 | Var::C3 | Var::C4 => EntityKind::Class,
            Var::R | Var::R1 | Var::R2 => EntityKind::ObjectProperty,
            Var::A | Var::B => EntityKind::Individual,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::C1 => "c1",
            Var::C2 => "c2",
            Var::C3 => "c3",
            Var::C4 => "c4",
            Var::R => "R",
            Var::R1 => "R1",
            Var::R2 => "R2",
            Var::A => "a",
            Var::B => "b",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Filler {
    Class(Var),
    And(Var, Var),
}

/// Right-hand side of a subclass schema.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemaExpr {
    Class(Var),
    Some { role: Var, inverse: bool, filler: Filler },
    Only { role: Var, filler: Var },
    AtMostOne(Var),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schema {
    Sub(Var, SchemaExpr),
    Equiv(Var, Var),
    Disj(Var, Var),
    SubProp(Var, Var),
    Domain(Var, Var),
    Range(Var, Var),
    /// Role, subject, object.
    Fact(Var, Var, Var),
    /// Individual, class.
    Type(Var, Var),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternTemplate {
    pub id: AntiPatternId,
    pub schemata: Vec<Schema>,
    /// Pairs that must bind to different names.
    pub distinct: Vec<(Var, Var)>,
    /// Variable permutations, as `(from, to)` pairs, under which the
    /// instantiated axiom set is unchanged.
    pub symmetries: Vec<Vec<(Var, Var)>>,
}

impl PatternTemplate {
    pub fn arity(&self) -> usize {
        self.schemata.len()
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut push = |v: Var| {
            if !out.contains(&v) {
                out.push(v);
            }
        };
        for s in &self.schemata {
            for v in schema_vars(s) {
                push(v);
            }
        }
        out.sort();
        out
    }
}

pub(crate) fn schema_vars(s: &Schema) -> Vec<Var> {
    match s {
        Schema::Sub(c, e) => {
            let mut v = vec![*c];
            match e {
                SchemaExpr::Class(d) => v.push(*d),
                SchemaExpr::Some { role, filler, .. } => {
                    v.push(*role);
                    match filler {
                        Filler::Class(d) => v.push(*d),
                        Filler::And(d, e) => v.extend([*d, *e]),
                    }
                }
                SchemaExpr::Only { role, filler } => v.extend([*role, *filler]),
                SchemaExpr::AtMostOne(r) => v.push(*r),
            }
            v
        }
        Schema::Equiv(a, b) | Schema::Disj(a, b) | Schema::SubProp(a, b) | Schema::Domain(a, b) | Schema::Range(a, b) => {
            vec![*a, *b]
        }
        Schema::Type(i, c) => vec![*i, *c],
        Schema::Fact(r, a, b) => vec![*r, *a, *b],
    }
}

pub fn templates() -> Vec<PatternTemplate> {
    AntiPatternId::ALL.into_iter().map(template).collect()
}

fn template(id: AntiPatternId) -> PatternTemplate {
    use AntiPatternId as P;
    use Schema::*;
    use Var::*;
    let only = |c: Var, r: Var, f: Var| Sub(c, SchemaExpr::Only { role: r, filler: f });
    let some = |c: Var, r: Var, f: Var| Sub(c, SchemaExpr::Some { role: r, inverse: false, filler: Filler::Class(f) });
    let isa = |c: Var, d: Var| Sub(c, SchemaExpr::Class(d));
    let (schemata, distinct, symmetries) = match id {
        P::AIO => (
            vec![Sub(C1, SchemaExpr::Some { role: R, inverse: false, filler: Filler::And(C2, C3) }), Disj(C2, C3)],
            vec![(C2, C3)],
            vec![vec![(C2, C3), (C3, C2)]],
        ),
        P::EID => (vec![Equiv(C1, C2), Disj(C1, C2)], vec![(C1, C2)], vec![vec![(C1, C2), (C2, C1)]]),
        P::OIL => (
            vec![only(C1, R, C2), only(C1, R, C3), Disj(C2, C3)],
            vec![(C2, C3)],
            vec![vec![(C2, C3), (C3, C2)]],
        ),
        P::OILWI => (
            vec![only(C1, R, C3), only(C2, R, C4), isa(C1, C2), Disj(C3, C4)],
            vec![(C3, C4), (C1, C2)],
            vec![],
        ),
        P::OILWPI => (
            vec![only(C1, R2, C3), only(C1, R1, C2), SubProp(R1, R2), Disj(C2, C3)],
            vec![(C2, C3), (R1, R2)],
            vec![],
        ),
        P::UE => (vec![only(C1, R, C2), some(C1, R, C3), Disj(C2, C3)], vec![(C2, C3)], vec![]),
        P::UEWI_1 => (
            vec![only(C3, R, C4), some(C1, R, C3), isa(C1, C2), Disj(C3, C4)],
            vec![(C3, C4), (C1, C2)],
            vec![],
        ),
        P::UEWI_2 => (
            vec![some(C2, R, C4), only(C1, R, C3), isa(C1, C2), Disj(C3, C4)],
            vec![(C3, C4), (C1, C2)],
            vec![],
        ),
        P::UEWPI => (
            vec![only(C1, R2, C3), some(C1, R1, C2), SubProp(R1, R2), Disj(C2, C3)],
            vec![(C2, C3), (R1, R2)],
            vec![],
        ),
        P::UEWIP => (
            vec![
                Sub(C2, SchemaExpr::Some { role: R, inverse: true, filler: Filler::Class(C1) }),
                only(C1, R, C3),
                Disj(C2, C3),
            ],
            vec![(C2, C3)],
            vec![],
        ),
        P::SOSINETO => (
            vec![some(C1, R, C2), some(C1, R, C3), Sub(C1, SchemaExpr::AtMostOne(R)), Disj(C2, C3)],
            vec![(C2, C3)],
            vec![vec![(C2, C3), (C3, C2)]],
        ),
        P::OOD => (vec![Domain(R, C1), Fact(R, A, B), Type(A, C2), Disj(C1, C2)], vec![(C1, C2)], vec![]),
        P::OOR => (vec![Range(R, C1), Fact(R, A, B), Type(B, C2), Disj(C1, C2)], vec![(C1, C2)], vec![]),
        P::CSC => (
            vec![isa(C1, C2), isa(C2, C3), isa(C3, C1)],
            vec![(C1, C2), (C2, C3), (C1, C3)],
            vec![vec![(C1, C2), (C2, C3), (C3, C1)]],
        ),
    };
    PatternTemplate { id, schemata, distinct, symmetries }
}

/// Variable assignment plus which schemata are present and which are not.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatchBinding {
    pub substitution: BTreeMap<Var, EntityName>,
    /// Schema indices found in the ontology.
    pub matched: Vec<usize>,
    /// Schema indices still to be added.
    pub missing: Vec<usize>,
}

impl MatchBinding {
    pub fn get(&self, v: Var) -> &EntityName {
        &self.substitution[&v]
    }

    pub fn missing_axioms(&self, t: &PatternTemplate) -> Vec<Axiom> {
        self.missing.iter().map(|&i| instantiate(&t.schemata[i], &self.substitution)).collect()
    }

    pub fn axioms(&self, t: &PatternTemplate) -> Vec<Axiom> {
        t.schemata.iter().map(|s| instantiate(s, &self.substitution)).collect()
    }

    /// `{c1: Foo, R: bar}` with local names.
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self.substitution.iter().map(|(v, n)| format!("{}: {}", v.name(), n)).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

pub fn instantiate(s: &Schema, b: &BTreeMap<Var, EntityName>) -> Axiom {
    let n = |v: &Var| b[v].clone();
    let cls = |v: &Var| ClassExpression::Named(b[v].clone());
    let role = |v: &Var, inverse: bool| {
        if inverse {
            RoleExpression::Inverse(b[v].clone())
        } else {
            RoleExpression::Named(b[v].clone())
        }
    };
    match s {
        Schema::Sub(c, e) => {
            let sup = match e {
                SchemaExpr::Class(d) => cls(d),
                SchemaExpr::Some { role: r, inverse, filler } => {
                    let f = match filler {
                        Filler::Class(d) => cls(d),
                        Filler::And(d, e) => ClassExpression::And(vec![cls(d), cls(e)]),
                    };
                    ClassExpression::some(role(r, *inverse), f)
                }
                SchemaExpr::Only { role: r, filler } => ClassExpression::only(role(r, false), cls(filler)),
                SchemaExpr::AtMostOne(r) => ClassExpression::at_most(1, role(r, false), ClassExpression::Top),
            };
            Axiom::SubClassOf { sub: n(c), sup }
        }
        Schema::Equiv(a, c) => Axiom::EquivalentClasses { class: n(a), expr: cls(c) },
        Schema::Disj(a, c) => Axiom::DisjointClasses(n(a), n(c)),
        Schema::SubProp(r, s) => Axiom::SubPropertyOf { sub: n(r), sup: n(s) },
        Schema::Domain(r, c) => Axiom::Domain { property: n(r), class: n(c) },
        Schema::Range(r, c) => Axiom::Range { property: n(r), class: n(c) },
        Schema::Fact(r, a, c) => Axiom::PropertyAssertion { property: n(r), subject: n(a), object: n(c) },
        Schema::Type(i, c) => Axiom::ClassAssertion { individual: n(i), class: cls(c) },
    }
}

/// The Table I instance of a pattern over names c1..c4, R, R1, R2, a, b,
/// with declarations for every name.
pub fn instance_fixture(id: AntiPatternId) -> Ontology {
    let t = template(id);
    let b = fixture_binding(&t);
    let mut axioms: Vec<Axiom> = b.values().cloned().map(Axiom::Declaration).collect();
    axioms.extend(t.schemata.iter().map(|s| instantiate(s, &b)));
    Ontology::new(format!("fixture_{}", id.name().to_ascii_lowercase()), axioms)
}

/// The instance with its last schema left out, ready for a one-axiom injection.
pub fn partial_fixture(id: AntiPatternId) -> Ontology {
    let mut o = instance_fixture(id);
    o.axioms.pop();
    o.id = format!("partial_{}", id.name().to_ascii_lowercase());
    o
}

fn fixture_binding(t: &PatternTemplate) -> BTreeMap<Var, EntityName> {
    t.vars()
        .into_iter()
        .map(|v| (v, EntityName::in_default(v.kind(), v.name())))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InjectionReport {
    pub pattern: AntiPatternId,
    pub injected_axioms: Vec<Axiom>,
    pub binding: MatchBinding,
    pub source_module: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InjectError {
    #[error("no injection site for {0} in {1}")]
    NoSite(AntiPatternId, String),
    #[error("max_missing must be 1 or 2, got {0}")]
    BadMaxMissing(usize),
}

/// Appends the missing axioms of one site. One-axiom sites win over
/// two-axiom ones; within a tier the site is drawn uniformly with `seed`.
pub fn inject(o: &Ontology, id: AntiPatternId, seed: u64) -> Result<(Ontology, InjectionReport), InjectError> {
    inject_with(o, id, seed, 2)
}

pub fn inject_with(
    o: &Ontology,
    id: AntiPatternId,
    seed: u64,
    max_missing: usize,
) -> Result<(Ontology, InjectionReport), InjectError> {
    if !(1..=2).contains(&max_missing) {
        return Err(InjectError::BadMaxMissing(max_missing));
    }
    let t = template(id);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = None;
    for tier in 1..=max_missing {
        // reservoir sampling over the lazily enumerated sites of this tier
        let mut seen = 0u64;
        for site in SiteIter::new(o, &t, tier, tier) {
            seen += 1;
            if rng.gen_range(0..seen) == 0 {
                chosen = Some(site);
            }
        }
        if chosen.is_some() {
            break;
        }
    }
    let binding = chosen.ok_or_else(|| InjectError::NoSite(id, o.id.clone()))?;
    let injected = binding.missing_axioms(&t);
    let mut out = o.clone();
    out.axioms.extend(injected.iter().cloned());
    let report = InjectionReport { pattern: id, injected_axioms: injected, binding, source_module: o.id.clone() };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourteen_templates_with_table_arities() {
        let ts = templates();
        assert_eq!(ts.len(), 14);
        assert_eq!(AntiPatternId::EID.template().arity(), 2);
        assert_eq!(AntiPatternId::OILWI.template().arity(), 4);
        assert!(ts.iter().all(|t| (2..=4).contains(&t.arity())));
    }

    #[test]
    fn families_group_variants() {
        assert_eq!(Family::OIL.members(), [AntiPatternId::OIL, AntiPatternId::OILWI, AntiPatternId::OILWPI]);
        assert_eq!(Family::UE.members().len(), 5);
        assert_eq!(Family::OO.members(), [AntiPatternId::OOD, AntiPatternId::OOR]);
        assert_eq!("oil*".parse::<Family>().unwrap(), Family::OIL);
    }

    #[test]
    fn ids_parse_loosely() {
        assert_eq!("uewi1".parse::<AntiPatternId>().unwrap(), AntiPatternId::UEWI_1);
        assert_eq!("SOSINETO".parse::<AntiPatternId>().unwrap(), AntiPatternId::SOSINETO);
        assert!("XYZ".parse::<AntiPatternId>().is_err());
    }

    #[test]
    fn sosineto_fixture_reads_like_the_table() {
        let o = instance_fixture(AntiPatternId::SOSINETO);
        let text: Vec<String> = o.logical_axioms().map(|a| format!("{a:?}")).collect();
        assert_eq!(text.len(), 4);
        assert!(text[2].contains("AtMost(1"));
    }

    #[test]
    fn one_injection_completes_ue() {
        let c = EntityName::class;
        let r = RoleExpression::named(&EntityName::property("R"));
        let o = Ontology::new(
            "m",
            vec![
                Axiom::sub_class(&c("c1"), ClassExpression::only(r.clone(), ClassExpression::named(&c("c2")))),
                Axiom::DisjointClasses(c("c2"), c("c3")),
            ],
        );
        let (o2, report) = inject(&o, AntiPatternId::UE, 7).unwrap();
        assert_eq!(report.injected_axioms, vec![Axiom::sub_class(&c("c1"), ClassExpression::some(r, ClassExpression::named(&c("c3"))))]);
        assert_eq!(&o2.axioms[..2], &o.axioms[..]);
        assert!(detect(&o2).iter().any(|(p, _)| *p == AntiPatternId::UE));
    }

    #[test]
    fn injection_is_deterministic_per_seed() {
        let o = partial_fixture(AntiPatternId::CSC);
        let a = inject(&o, AntiPatternId::EID, 3).unwrap();
        let b = inject(&o, AntiPatternId::EID, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.1.injected_axioms.len(), 2);
    }

    #[test]
    fn no_site_is_an_error() {
        let o = Ontology::new("empty", vec![]);
        assert!(matches!(inject(&o, AntiPatternId::EID, 0), Err(InjectError::NoSite(..))));
    }
}
