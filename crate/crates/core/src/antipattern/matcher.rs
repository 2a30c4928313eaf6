use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use super::{instantiate, AntiPatternId, Filler, MatchBinding, PatternTemplate, Schema, SchemaExpr, Var};
use crate::model::{Axiom, ClassExpression, EntityName, Ontology};

type Subst = BTreeMap<Var, EntityName>;

/// Canonical form used for presence tests: disjointness and named
/// equivalence ordered by name, conjunction and disjunction operands sorted.
pub fn normalize(a: &Axiom) -> Axiom {
    match a {
        Axiom::DisjointClasses(x, y) if y < x => Axiom::DisjointClasses(y.clone(), x.clone()),
        Axiom::EquivalentClasses { class, expr: ClassExpression::Named(other) } if other < class => {
            Axiom::EquivalentClasses { class: other.clone(), expr: ClassExpression::Named(class.clone()) }
        }
        Axiom::SubClassOf { sub, sup } => Axiom::SubClassOf { sub: sub.clone(), sup: norm_expr(sup) },
        Axiom::EquivalentClasses { class, expr } => Axiom::EquivalentClasses { class: class.clone(), expr: norm_expr(expr) },
        Axiom::ClassAssertion { individual, class } => {
            Axiom::ClassAssertion { individual: individual.clone(), class: norm_expr(class) }
        }
        other => other.clone(),
    }
}

fn norm_expr(e: &ClassExpression) -> ClassExpression {
    use ClassExpression as CE;
    match e {
        CE::And(v) | CE::Or(v) => {
            let mut ops: Vec<_> = v.iter().map(norm_expr).collect();
            ops.sort();
            if matches!(e, CE::And(_)) {
                CE::And(ops)
            } else {
                CE::Or(ops)
            }
        }
        CE::Not(x) => CE::not(norm_expr(x)),
        CE::Some(r, x) => CE::some(r.clone(), norm_expr(x)),
        CE::Only(r, x) => CE::only(r.clone(), norm_expr(x)),
        CE::AtMost(n, r, x) => CE::at_most(*n, r.clone(), norm_expr(x)),
        _ => e.clone(),
    }
}

/// The lexicographically least substitution in the orbit of `s` under the
/// template's symmetries.
pub fn canonical(t: &PatternTemplate, s: &BTreeMap<Var, EntityName>) -> BTreeMap<Var, EntityName> {
    if t.symmetries.is_empty() {
        return s.clone();
    }
    let mut seen: BTreeSet<Subst> = BTreeSet::new();
    let mut queue = vec![s.clone()];
    while let Some(cur) = queue.pop() {
        if !seen.insert(cur.clone()) {
            continue;
        }
        for g in &t.symmetries {
            let mut next = cur.clone();
            for (from, to) in g {
                match cur.get(from) {
                    Some(n) => {
                        next.insert(*to, n.clone());
                    }
                    None => {
                        next.remove(to);
                    }
                }
            }
            queue.push(next);
        }
    }
    seen.into_iter().next().expect("orbit contains s")
}

const SHAPES: usize = 8;

fn axiom_shape(a: &Axiom) -> Option<usize> {
    Some(match a {
        Axiom::SubClassOf { .. } => 0,
        Axiom::EquivalentClasses { .. } => 1,
        Axiom::DisjointClasses(..) => 2,
        Axiom::SubPropertyOf { .. } => 3,
        Axiom::Domain { .. } => 4,
        Axiom::Range { .. } => 5,
        Axiom::PropertyAssertion { .. } => 6,
        Axiom::ClassAssertion { .. } => 7,
        _ => return None,
    })
}

fn schema_shape(s: &Schema) -> usize {
    match s {
        Schema::Sub(..) => 0,
        Schema::Equiv(..) => 1,
        Schema::Disj(..) => 2,
        Schema::SubProp(..) => 3,
        Schema::Domain(..) => 4,
        Schema::Range(..) => 5,
        Schema::Fact(..) => 6,
        Schema::Type(..) => 7,
    }
}

/// Names an axiom is filed under in the key index.
fn axiom_keys(a: &Axiom) -> Vec<&EntityName> {
    match a {
        Axiom::SubClassOf { sub, .. } => vec![sub],
        Axiom::EquivalentClasses { class, expr } => match expr {
            ClassExpression::Named(o) => vec![class, o],
            _ => vec![class],
        },
        Axiom::DisjointClasses(x, y) => vec![x, y],
        Axiom::SubPropertyOf { sub, .. } => vec![sub],
        Axiom::Domain { property, .. } | Axiom::Range { property, .. } => vec![property],
        Axiom::PropertyAssertion { subject, .. } => vec![subject],
        Axiom::ClassAssertion { individual, .. } => vec![individual],
        _ => vec![],
    }
}

/// Variables whose binding selects a key bucket for the schema.
fn schema_keys(s: &Schema) -> Vec<Var> {
    match s {
        Schema::Sub(c, _) => vec![*c],
        Schema::Equiv(a, b) | Schema::Disj(a, b) => vec![*a, *b],
        Schema::SubProp(r, _) | Schema::Domain(r, _) | Schema::Range(r, _) => vec![*r],
        Schema::Fact(_, a, _) => vec![*a],
        Schema::Type(i, _) => vec![*i],
    }
}

struct Index {
    axioms: Vec<Axiom>,
    present: HashSet<Axiom>,
    by_shape: Vec<Vec<usize>>,
    by_key: HashMap<(usize, EntityName), Vec<usize>>,
}

impl Index {
    fn new(o: &Ontology) -> Self {
        let set: BTreeSet<Axiom> = o.logical_axioms().map(normalize).collect();
        let axioms: Vec<Axiom> = set.into_iter().collect();
        let mut by_shape = vec![Vec::new(); SHAPES];
        let mut by_key: HashMap<(usize, EntityName), Vec<usize>> = HashMap::new();
        for (i, a) in axioms.iter().enumerate() {
            if let Some(sh) = axiom_shape(a) {
                by_shape[sh].push(i);
                let mut keys = axiom_keys(a);
                keys.dedup();
                for k in keys {
                    by_key.entry((sh, k.clone())).or_default().push(i);
                }
            }
        }
        let present = axioms.iter().cloned().collect();
        Index { axioms, present, by_shape, by_key }
    }

    fn candidates(&self, schema: &Schema, s: &Subst) -> &[usize] {
        let sh = schema_shape(schema);
        for v in schema_keys(schema) {
            if let Some(n) = s.get(&v) {
                return self.by_key.get(&(sh, n.clone())).map(Vec::as_slice).unwrap_or(&[]);
            }
        }
        &self.by_shape[sh]
    }
}

fn bind(s: &mut Subst, v: Var, n: &EntityName) -> bool {
    if n.kind() != v.kind() {
        return false;
    }
    match s.get(&v) {
        Some(m) => m == n,
        None => {
            s.insert(v, n.clone());
            true
        }
    }
}

fn bind_all(s: &Subst, pairs: &[(Var, &EntityName)], out: &mut Vec<Subst>) {
    let mut e = s.clone();
    if pairs.iter().all(|(v, n)| bind(&mut e, *v, n)) {
        out.push(e);
    }
}

fn named(c: &ClassExpression) -> Option<&EntityName> {
    c.as_named()
}

fn unify(schema: &Schema, a: &Axiom, s: &Subst, out: &mut Vec<Subst>) {
    use ClassExpression as CE;
    match (schema, a) {
        (Schema::Sub(c, e), Axiom::SubClassOf { sub, sup }) => match (e, sup) {
            (SchemaExpr::Class(d), CE::Named(n)) => bind_all(s, &[(*c, sub), (*d, n)], out),
            (SchemaExpr::Some { role, inverse, filler }, CE::Some(r, f)) if r.is_inverse() == *inverse => {
                match filler {
                    Filler::Class(d) => {
                        if let Some(n) = named(f) {
                            bind_all(s, &[(*c, sub), (*role, r.property()), (*d, n)], out);
                        }
                    }
                    Filler::And(d1, d2) => {
                        if let CE::And(ops) = &**f {
                            if let [x, y] = ops.as_slice() {
                                if let (Some(x), Some(y)) = (named(x), named(y)) {
                                    bind_all(s, &[(*c, sub), (*role, r.property()), (*d1, x), (*d2, y)], out);
                                    if x != y {
                                        bind_all(s, &[(*c, sub), (*role, r.property()), (*d1, y), (*d2, x)], out);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            (SchemaExpr::Only { role, filler }, CE::Only(r, f)) if !r.is_inverse() => {
                if let Some(n) = named(f) {
                    bind_all(s, &[(*c, sub), (*role, r.property()), (*filler, n)], out);
                }
            }
            (SchemaExpr::AtMostOne(role), CE::AtMost(1, r, f)) if !r.is_inverse() && **f == CE::Top => {
                bind_all(s, &[(*c, sub), (*role, r.property())], out)
            }
            _ => {}
        },
        (Schema::Equiv(x, y), Axiom::EquivalentClasses { class, expr: CE::Named(n) }) => {
            bind_all(s, &[(*x, class), (*y, n)], out);
            bind_all(s, &[(*x, n), (*y, class)], out);
        }
        (Schema::Disj(x, y), Axiom::DisjointClasses(p, q)) => {
            bind_all(s, &[(*x, p), (*y, q)], out);
            bind_all(s, &[(*x, q), (*y, p)], out);
        }
        (Schema::SubProp(r1, r2), Axiom::SubPropertyOf { sub, sup }) => bind_all(s, &[(*r1, sub), (*r2, sup)], out),
        (Schema::Domain(r, c), Axiom::Domain { property, class }) | (Schema::Range(r, c), Axiom::Range { property, class }) => {
            bind_all(s, &[(*r, property), (*c, class)], out)
        }
        (Schema::Fact(r, x, y), Axiom::PropertyAssertion { property, subject, object }) => {
            bind_all(s, &[(*r, property), (*x, subject), (*y, object)], out)
        }
        (Schema::Type(i, c), Axiom::ClassAssertion { individual, class: CE::Named(n) }) => {
            bind_all(s, &[(*i, individual), (*c, n)], out)
        }
        _ => {}
    }
}

fn distinct_ok(t: &PatternTemplate, s: &Subst) -> bool {
    t.distinct.iter().all(|(x, y)| match (s.get(x), s.get(y)) {
        (Some(a), Some(b)) => a != b,
        _ => true,
    })
}

/// All substitutions under which every schema in `todo` is present.
fn search(ix: &Index, t: &PatternTemplate, todo: &mut Vec<usize>, s: &Subst, out: &mut Vec<Subst>) {
    if todo.is_empty() {
        out.push(s.clone());
        return;
    }
    // most constrained schema first
    let (pos, _) = todo
        .iter()
        .enumerate()
        .map(|(p, &i)| (p, ix.candidates(&t.schemata[i], s).len()))
        .min_by_key(|&(_, n)| n)
        .expect("non-empty");
    let i = todo.swap_remove(pos);
    let schema = &t.schemata[i];
    let mut ext = Vec::new();
    for &c in ix.candidates(schema, s) {
        ext.clear();
        unify(schema, &ix.axioms[c], s, &mut ext);
        for e in &ext {
            if distinct_ok(t, e) {
                search(ix, t, todo, e, out);
            }
        }
    }
    todo.push(i);
    let last = todo.len() - 1;
    todo.swap(pos, last);
}

/// Every complete instance of every pattern, sorted by pattern then binding.
pub fn detect(o: &Ontology) -> Vec<(AntiPatternId, MatchBinding)> {
    let ix = Index::new(o);
    AntiPatternId::ALL
        .into_iter()
        .flat_map(|id| detect_in(&ix, &id.template()).into_iter().map(move |b| (id, b)))
        .collect()
}

pub fn detect_pattern(o: &Ontology, id: AntiPatternId) -> Vec<MatchBinding> {
    detect_in(&Index::new(o), &id.template())
}

fn detect_in(ix: &Index, t: &PatternTemplate) -> Vec<MatchBinding> {
    let mut found = Vec::new();
    let mut todo: Vec<usize> = (0..t.arity()).collect();
    search(ix, t, &mut todo, &Subst::new(), &mut found);
    let set: BTreeSet<Subst> = found.iter().map(|s| canonical(t, s)).collect();
    set.into_iter()
        .map(|substitution| MatchBinding { substitution, matched: (0..t.arity()).collect(), missing: Vec::new() })
        .collect()
}

/// Injection sites with one up to `max_missing` axioms missing.
pub fn find_injection_sites(o: &Ontology, id: AntiPatternId, max_missing: usize) -> Vec<MatchBinding> {
    injection_sites(o, id, 1, max_missing)
}

/// All injection sites with between `min` and `max` missing axioms.
pub fn injection_sites(o: &Ontology, id: AntiPatternId, min: usize, max: usize) -> Vec<MatchBinding> {
    SiteIter::new(o, &id.template(), min, max).collect()
}

/// Lazily enumerates injection sites one missing-set at a time.
pub struct SiteIter {
    ix: Index,
    t: PatternTemplate,
    pool: BTreeMap<crate::model::EntityKind, Vec<EntityName>>,
    subsets: VecDeque<Vec<usize>>,
    buffer: VecDeque<MatchBinding>,
    seen: HashSet<(Vec<Axiom>, Vec<Axiom>)>,
}

impl SiteIter {
    pub fn new(o: &Ontology, t: &PatternTemplate, min: usize, max: usize) -> Self {
        let n = t.arity();
        let mut subsets = VecDeque::new();
        for k in min.max(1)..=max.min(n) {
            combinations(n, k, &mut Vec::new(), 0, &mut subsets);
        }
        let mut pool: BTreeMap<_, Vec<EntityName>> = BTreeMap::new();
        for name in o.signature() {
            pool.entry(name.kind()).or_default().push(name);
        }
        SiteIter {
            ix: Index::new(o),
            t: t.clone(),
            pool,
            subsets,
            buffer: VecDeque::new(),
            seen: HashSet::new(),
        }
    }

    fn fill(&mut self, missing: &[usize]) {
        let t = &self.t;
        let mut todo: Vec<usize> = (0..t.arity()).filter(|i| !missing.contains(i)).collect();
        let mut partial = Vec::new();
        search(&self.ix, t, &mut todo, &Subst::new(), &mut partial);
        let vars = t.vars();
        for s in partial {
            let free: Vec<Var> = vars.iter().copied().filter(|v| !s.contains_key(v)).collect();
            let mut complete = Vec::new();
            extend(&self.pool, t, &free, s, &mut complete);
            for s in complete {
                let miss: Vec<Axiom> = missing.iter().map(|&i| normalize(&instantiate(&t.schemata[i], &s))).collect();
                if miss.iter().any(|a| self.ix.present.contains(a)) {
                    continue;
                }
                let mut all: Vec<Axiom> = t.schemata.iter().map(|x| normalize(&instantiate(x, &s))).collect();
                all.sort();
                let mut miss_key = miss.clone();
                miss_key.sort();
                if !self.seen.insert((all, miss_key)) {
                    continue;
                }
                let substitution = canonical(t, &s);
                let (mut matched, mut missing_ix) = (Vec::new(), Vec::new());
                for (i, x) in t.schemata.iter().enumerate() {
                    let a = normalize(&instantiate(x, &substitution));
                    if miss.contains(&a) {
                        missing_ix.push(i);
                    } else {
                        matched.push(i);
                    }
                }
                self.buffer.push_back(MatchBinding { substitution, matched, missing: missing_ix });
            }
        }
    }
}

fn combinations(n: usize, k: usize, cur: &mut Vec<usize>, start: usize, out: &mut VecDeque<Vec<usize>>) {
    if cur.len() == k {
        out.push_back(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        combinations(n, k, cur, i + 1, out);
        cur.pop();
    }
}

fn extend(
    pool: &BTreeMap<crate::model::EntityKind, Vec<EntityName>>,
    t: &PatternTemplate,
    free: &[Var],
    s: Subst,
    out: &mut Vec<Subst>,
) {
    let Some((&v, rest)) = free.split_first() else {
        out.push(s);
        return;
    };
    for name in pool.get(&v.kind()).into_iter().flatten() {
        let mut e = s.clone();
        e.insert(v, name.clone());
        if distinct_ok(t, &e) {
            extend(pool, t, rest, e, out);
        }
    }
}

impl Iterator for SiteIter {
    type Item = MatchBinding;

    fn next(&mut self) -> Option<MatchBinding> {
        loop {
            if let Some(b) = self.buffer.pop_front() {
                return Some(b);
            }
            let m = self.subsets.pop_front()?;
            self.fill(&m);
        }
    }
}
