use std::collections::{HashMap, HashSet};

use super::lexer::{tokenize, Token, TokenKind, FRAME_KEYWORDS};
use super::{ParseError, OWL_NAMESPACE};
use crate::model::{
    Axiom, ClassExpression, EntityKind, EntityName, Ontology, RoleExpression, DEFAULT_NAMESPACE,
};

const MAX_NESTING: usize = 128;

/// A parsed document: the ontology plus what the reader learned on the way.
#[derive(Clone, Debug)]
pub struct Document {
    pub ontology: Ontology,
    /// Prefix label (without the colon) to namespace, in declaration order.
    pub prefixes: Vec<(String, String)>,
    /// Annotation clauses and data/annotation frames that were skipped.
    pub dropped: usize,
}

pub fn parse(text: &str) -> Result<Ontology, ParseError> {
    parse_document(text).map(|d| d.ontology)
}

pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        text,
        tokens,
        pos: 0,
        prefixes: vec![("owl".to_string(), OWL_NAMESPACE.to_string())],
        kinds: HashMap::new(),
        declared: HashSet::new(),
        axioms: Vec::new(),
        dropped: 0,
        id: String::new(),
        depth: 0,
    };
    p.document()?;
    let prefixes = p.prefixes.into_iter().filter(|(l, _)| l != "owl").collect();
    Ok(Document {
        ontology: Ontology::new(p.id, p.axioms),
        prefixes,
        dropped: p.dropped,
    })
}

struct Parser<'t> {
    text: &'t str,
    tokens: Vec<Token>,
    pos: usize,
    prefixes: Vec<(String, String)>,
    kinds: HashMap<String, EntityKind>,
    declared: HashSet<EntityName>,
    axioms: Vec<Axiom>,
    dropped: usize,
    id: String,
    depth: usize,
}

enum Resolved {
    Entity(String),
    Thing,
    Nothing,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn lexeme(&self, t: &Token) -> String {
        if t.kind == TokenKind::Eof {
            "end of input".to_string()
        } else {
            self.text[t.start..t.end].to_string()
        }
    }

    fn error(&self, t: &Token, expected: &str) -> ParseError {
        ParseError::at(self.text, t.end, expected, &self.lexeme(t))
    }

    fn error_here(&self, expected: &str) -> ParseError {
        let t = self.tokens[self.pos].clone();
        self.error(&t, expected)
    }

    fn document(&mut self) -> Result<(), ParseError> {
        loop {
            let t = self.next();
            match t.kind {
                TokenKind::Eof => return Ok(()),
                TokenKind::Keyword("Prefix") => self.prefix_decl()?,
                TokenKind::Keyword("Ontology") => {
                    if let TokenKind::Iri(iri) = self.peek().clone() {
                        self.next();
                        self.id = iri;
                    }
                }
                TokenKind::Keyword("Class") => self.class_frame()?,
                TokenKind::Keyword("ObjectProperty") => self.property_frame()?,
                TokenKind::Keyword("Individual") => self.individual_frame()?,
                TokenKind::Keyword("DataProperty" | "AnnotationProperty" | "Datatype") => {
                    self.dropped += 1;
                    self.skip_until_frame();
                }
                _ => return Err(self.error(&t, "a frame keyword such as 'Class:'")),
            }
        }
    }

    fn skip_until_frame(&mut self) {
        while !matches!(self.peek(), TokenKind::Eof)
            && !matches!(self.peek(), TokenKind::Keyword(k) if FRAME_KEYWORDS.contains(k))
        {
            self.next();
        }
    }

    fn skip_clause_payload(&mut self) {
        while !matches!(self.peek(), TokenKind::Eof | TokenKind::Keyword(_)) {
            self.next();
        }
    }

    fn prefix_decl(&mut self) -> Result<(), ParseError> {
        let t = self.next();
        let label = match &t.kind {
            TokenKind::Name(n) if n.ends_with(':') && n.matches(':').count() == 1 => {
                n.trim_end_matches(':').to_string()
            }
            _ => return Err(self.error(&t, "a prefix label such as 'ex:'")),
        };
        let t = self.next();
        let ns = match &t.kind {
            TokenKind::Iri(iri) => iri.clone(),
            _ => return Err(self.error(&t, "a namespace IRI in angle brackets")),
        };
        match self.prefixes.iter_mut().find(|(l, _)| *l == label) {
            Some(entry) => entry.1 = ns,
            None => self.prefixes.push((label, ns)),
        }
        Ok(())
    }

    fn namespace(&self, label: &str) -> Option<&str> {
        if let Some((_, ns)) = self.prefixes.iter().find(|(l, _)| l == label) {
            return Some(ns);
        }
        (label.is_empty()).then_some(DEFAULT_NAMESPACE)
    }

    fn resolve(&mut self, t: &Token) -> Result<Resolved, ParseError> {
        let iri = match &t.kind {
            TokenKind::Iri(iri) => iri.clone(),
            TokenKind::Name(name) => match name.split_once(':') {
                Some((label, local)) => {
                    if local.is_empty() || local.contains(':') {
                        return Err(self.error(t, "a name"));
                    }
                    match self.namespace(label) {
                        Some(ns) => format!("{ns}{local}"),
                        None => {
                            let colon = t.start + label.len() + 1;
                            return Err(ParseError::at(
                                self.text,
                                colon,
                                "a declared prefix",
                                &format!("{label}:"),
                            ));
                        }
                    }
                }
                None => format!("{}{name}", self.namespace("").unwrap_or(DEFAULT_NAMESPACE)),
            },
            _ => return Err(self.error(t, "a name")),
        };
        if iri == format!("{OWL_NAMESPACE}Thing") {
            Ok(Resolved::Thing)
        } else if iri == format!("{OWL_NAMESPACE}Nothing") {
            Ok(Resolved::Nothing)
        } else {
            Ok(Resolved::Entity(iri))
        }
    }

    fn entity(&mut self, t: &Token, kind: EntityKind) -> Result<EntityName, ParseError> {
        let iri = match self.resolve(t)? {
            Resolved::Entity(iri) => iri,
            _ => return Err(self.error(t, &format!("a {} name", kind.keyword()))),
        };
        if let Some(prev) = self.kinds.get(&iri) {
            if *prev != kind {
                return Err(self.error(
                    t,
                    &format!("a {} name (already used as {})", kind.keyword(), prev.keyword()),
                ));
            }
        }
        let name = EntityName::new(kind, &iri).map_err(|_| self.error(t, "a well-formed IRI"))?;
        self.kinds.insert(iri, kind);
        Ok(name)
    }

    fn frame_subject(&mut self, kind: EntityKind) -> Result<EntityName, ParseError> {
        let t = self.next();
        let name = self.entity(&t, kind)?;
        if self.declared.insert(name.clone()) {
            self.axioms.push(Axiom::Declaration(name.clone()));
        }
        Ok(name)
    }

    /// Comma separated payload items, each parsed by `item`.
    fn list<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, ParseError>,
    ) -> Result<Vec<T>, ParseError> {
        let mut out = vec![item(self)?];
        while matches!(self.peek(), TokenKind::Comma) {
            self.next();
            out.push(item(self)?);
        }
        Ok(out)
    }

    fn named(&mut self, kind: EntityKind) -> Result<EntityName, ParseError> {
        let t = self.next();
        self.entity(&t, kind)
    }

    fn clause_keyword(&mut self, allowed: &[&str]) -> Result<Option<&'static str>, ParseError> {
        match self.peek().clone() {
            TokenKind::Keyword(k) if allowed.contains(&k) => {
                self.next();
                Ok(Some(k))
            }
            TokenKind::Keyword(k) if FRAME_KEYWORDS.contains(&k) => Ok(None),
            TokenKind::Eof => Ok(None),
            _ => {
                let expected = format!("one of {} or a new frame", allowed.join(":, ") + ":");
                Err(self.error_here(&expected))
            }
        }
    }

    fn class_frame(&mut self) -> Result<(), ParseError> {
        let subject = self.frame_subject(EntityKind::Class)?;
        while let Some(k) =
            self.clause_keyword(&["SubClassOf", "EquivalentTo", "DisjointWith", "Annotations"])?
        {
            match k {
                "SubClassOf" => {
                    for sup in self.list(|p| p.description())? {
                        self.axioms.push(Axiom::SubClassOf { sub: subject.clone(), sup });
                    }
                }
                "EquivalentTo" => {
                    for expr in self.list(|p| p.description())? {
                        self.axioms.push(Axiom::EquivalentClasses { class: subject.clone(), expr });
                    }
                }
                "DisjointWith" => {
                    let others = self.list(|p| {
                        let t = p.next();
                        let other = p.entity(&t, EntityKind::Class)?;
                        if other == subject {
                            return Err(p.error(&t, "a class other than the frame subject"));
                        }
                        Ok(other)
                    })?;
                    for other in others {
                        self.axioms.push(Axiom::DisjointClasses(subject.clone(), other));
                    }
                }
                _ => {
                    self.dropped += 1;
                    self.skip_clause_payload();
                }
            }
        }
        Ok(())
    }

    fn property_frame(&mut self) -> Result<(), ParseError> {
        use EntityKind::{Class, ObjectProperty};
        let subject = self.frame_subject(ObjectProperty)?;
        while let Some(k) = self.clause_keyword(&[
            "Domain",
            "Range",
            "SubPropertyOf",
            "InverseOf",
            "Annotations",
        ])? {
            match k {
                "Domain" => {
                    for class in self.list(|p| p.named(Class))? {
                        self.axioms.push(Axiom::Domain { property: subject.clone(), class });
                    }
                }
                "Range" => {
                    for class in self.list(|p| p.named(Class))? {
                        self.axioms.push(Axiom::Range { property: subject.clone(), class });
                    }
                }
                "SubPropertyOf" => {
                    for sup in self.list(|p| p.named(ObjectProperty))? {
                        self.axioms.push(Axiom::SubPropertyOf { sub: subject.clone(), sup });
                    }
                }
                "InverseOf" => {
                    for other in self.list(|p| p.named(ObjectProperty))? {
                        self.axioms.push(Axiom::InverseProperties(subject.clone(), other));
                    }
                }
                _ => {
                    self.dropped += 1;
                    self.skip_clause_payload();
                }
            }
        }
        Ok(())
    }

    fn individual_frame(&mut self) -> Result<(), ParseError> {
        use EntityKind::{Individual, ObjectProperty};
        let subject = self.frame_subject(Individual)?;
        while let Some(k) = self.clause_keyword(&["Types", "Facts", "Annotations"])? {
            match k {
                "Types" => {
                    for class in self.list(|p| p.description())? {
                        self.axioms.push(Axiom::ClassAssertion { individual: subject.clone(), class });
                    }
                }
                "Facts" => {
                    let facts = self.list(|p| {
                        let property = p.named(ObjectProperty)?;
                        let object = p.named(Individual)?;
                        Ok((property, object))
                    })?;
                    for (property, object) in facts {
                        self.axioms.push(Axiom::PropertyAssertion {
                            property,
                            subject: subject.clone(),
                            object,
                        });
                    }
                }
                _ => {
                    self.dropped += 1;
                    self.skip_clause_payload();
                }
            }
        }
        Ok(())
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), TokenKind::Name(n) if n == word)
    }

    fn description(&mut self) -> Result<ClassExpression, ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(self.error_here("a less deeply nested expression"));
        }
        let mut items = vec![self.conjunction()?];
        while self.is_word("or") {
            self.next();
            items.push(self.conjunction()?);
        }
        self.depth -= 1;
        Ok(if items.len() == 1 { items.pop().unwrap() } else { ClassExpression::Or(items) })
    }

    fn conjunction(&mut self) -> Result<ClassExpression, ParseError> {
        let mut items = vec![self.primary()?];
        while self.is_word("and") {
            self.next();
            items.push(self.primary()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { ClassExpression::And(items) })
    }

    fn primary(&mut self) -> Result<ClassExpression, ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(self.error_here("a less deeply nested expression"));
        }
        let result = self.primary_inner();
        self.depth -= 1;
        result
    }

    fn primary_inner(&mut self) -> Result<ClassExpression, ParseError> {
        let t = self.next();
        match &t.kind {
            TokenKind::LParen => {
                let inner = self.description()?;
                let close = self.next();
                if close.kind != TokenKind::RParen {
                    let (line, col) = {
                        let e = ParseError::at(self.text, t.start, "", "");
                        (e.line, e.column)
                    };
                    return Err(self.error(
                        &close,
                        &format!("')' closing the '(' at {line}:{col}"),
                    ));
                }
                Ok(inner)
            }
            TokenKind::Name(n) if n == "not" => Ok(ClassExpression::not(self.primary()?)),
            TokenKind::Name(n) if n == "inverse" => {
                let parenthesised = matches!(self.peek(), TokenKind::LParen);
                if parenthesised {
                    self.next();
                }
                let property = self.named(EntityKind::ObjectProperty)?;
                if parenthesised {
                    let close = self.next();
                    if close.kind != TokenKind::RParen {
                        return Err(self.error(&close, "')' after the inverse property"));
                    }
                }
                self.restriction(RoleExpression::Inverse(property))
            }
            TokenKind::Name(n) if is_operator(n) => Err(self.error(&t, "a class expression")),
            TokenKind::Name(_) | TokenKind::Iri(_) => {
                if matches!(self.peek(), TokenKind::Name(n) if matches!(n.as_str(), "some" | "only" | "max"))
                {
                    let property = self.entity(&t, EntityKind::ObjectProperty)?;
                    return self.restriction(RoleExpression::Named(property));
                }
                match self.resolve(&t)? {
                    Resolved::Thing => Ok(ClassExpression::Top),
                    Resolved::Nothing => Ok(ClassExpression::Bottom),
                    // a known property here can only start a restriction, so
                    // blame the token that should have been its quantifier
                    Resolved::Entity(iri) if self.kinds.get(&iri) == Some(&EntityKind::ObjectProperty) => {
                        let property = self.entity(&t, EntityKind::ObjectProperty)?;
                        self.restriction(RoleExpression::Named(property))
                    }
                    Resolved::Entity(_) => Ok(ClassExpression::Named(self.entity(&t, EntityKind::Class)?)),
                }
            }
            _ => Err(self.error(&t, "a class expression")),
        }
    }

    fn restriction(&mut self, role: RoleExpression) -> Result<ClassExpression, ParseError> {
        let t = self.next();
        match &t.kind {
            TokenKind::Name(n) if n == "some" => Ok(ClassExpression::some(role, self.primary()?)),
            TokenKind::Name(n) if n == "only" => Ok(ClassExpression::only(role, self.primary()?)),
            TokenKind::Name(n) if n == "max" => {
                let nt = self.next();
                let n = match nt.kind {
                    TokenKind::Int(n) if n <= u32::MAX as u64 => n as u32,
                    _ => return Err(self.error(&nt, "a cardinality")),
                };
                let filler = if self.starts_primary() { self.primary()? } else { ClassExpression::Top };
                Ok(ClassExpression::at_most(n, role, filler))
            }
            _ => Err(self.error(&t, "'some', 'only' or 'max'")),
        }
    }

    fn starts_primary(&self) -> bool {
        match self.peek() {
            TokenKind::LParen | TokenKind::Iri(_) => true,
            TokenKind::Name(n) => !matches!(n.as_str(), "and" | "or" | "some" | "only" | "max"),
            _ => false,
        }
    }
}

fn is_operator(word: &str) -> bool {
    matches!(word, "and" | "or" | "some" | "only" | "max")
}
