//! Manchester-syntax reader and writer for the supported OWL fragment.
//!
//! Frames: `Class:` (SubClassOf, EquivalentTo, DisjointWith), `ObjectProperty:`
//! (Domain, Range, SubPropertyOf, InverseOf) and `Individual:` (Types, Facts).
//! `DataProperty:`, `AnnotationProperty:` and `Datatype:` frames and
//! `Annotations:` clauses are read and dropped; the number of dropped items is
//! reported by [`parse_document`].

mod lexer;
mod parser;
mod writer;

use std::fmt;

pub use parser::{parse, parse_document, Document};
pub use writer::serialize;

pub const OWL_NAMESPACE: &str = "http://www.w3.org/2002/07/owl#";

/// Where and why parsing stopped. Positions are 1-based and point at the
/// cursor position just past the offending lexeme.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

impl ParseError {
    pub(crate) fn at(text: &str, offset: usize, expected: &str, found: &str) -> Self {
        let offset = offset.min(text.len());
        let before = &text[..floor_char_boundary(text, offset)];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError {
            line,
            column,
            offset,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}

fn floor_char_boundary(text: &str, mut i: usize) -> usize {
    while !text.is_char_boundary(i) {
        i -= 1;
    }
    i
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: expected {}, found {}",
            self.line, self.column, self.expected, self.found
        )
    }
}
