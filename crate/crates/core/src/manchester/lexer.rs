use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum TokenKind {
    /// `Class:`, `SubClassOf:` and friends.
    Keyword(&'static str),
    /// Bare or prefixed name, possibly just a prefix label such as `ex:`.
    Name(String),
    /// `<...>` with the brackets removed.
    Iri(String),
    Int(u64),
    /// String literal, only ever skipped.
    Literal,
    LParen,
    RParen,
    Comma,
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub start: usize,
    pub end: usize,
}

pub(crate) const FRAME_KEYWORDS: &[&str] = &[
    "Prefix",
    "Ontology",
    "Class",
    "ObjectProperty",
    "Individual",
    "DataProperty",
    "AnnotationProperty",
    "Datatype",
];

pub(crate) const CLAUSE_KEYWORDS: &[&str] = &[
    "SubClassOf",
    "EquivalentTo",
    "DisjointWith",
    "Domain",
    "Range",
    "SubPropertyOf",
    "InverseOf",
    "Types",
    "Facts",
    "Annotations",
    "Characteristics",
];

fn keyword(word: &str) -> Option<&'static str> {
    FRAME_KEYWORDS
        .iter()
        .chain(CLAUSE_KEYWORDS)
        .find(|k| **k == word)
        .copied()
}

pub(crate) fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':')
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '#' {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        let single = |kind| Token { kind, start, end: start + c.len_utf8() };
        match c {
            '(' => {
                chars.next();
                tokens.push(single(TokenKind::LParen));
            }
            ')' => {
                chars.next();
                tokens.push(single(TokenKind::RParen));
            }
            ',' => {
                chars.next();
                tokens.push(single(TokenKind::Comma));
            }
            '<' => {
                chars.next();
                let mut end = None;
                for (i, c) in chars.by_ref() {
                    if c == '>' {
                        end = Some(i);
                        break;
                    }
                    if c.is_whitespace() || c == '<' {
                        return Err(ParseError::at(text, i + c.len_utf8(), "'>' closing the IRI", &c.to_string()));
                    }
                }
                let end = end.ok_or_else(|| ParseError::at(text, text.len(), "'>' closing the IRI", "end of input"))?;
                tokens.push(Token {
                    kind: TokenKind::Iri(text[start + 1..end].to_string()),
                    start,
                    end: end + 1,
                });
            }
            '"' => {
                chars.next();
                let mut closed = None;
                let mut escaped = false;
                for (i, c) in chars.by_ref() {
                    if escaped {
                        escaped = false;
                    } else if c == '\\' {
                        escaped = true;
                    } else if c == '"' {
                        closed = Some(i + 1);
                        break;
                    }
                }
                let mut end = closed.ok_or_else(|| {
                    ParseError::at(text, text.len(), "'\"' closing the literal", "end of input")
                })?;
                // language tag or datatype suffix
                if let Some(&(_, c)) = chars.peek() {
                    if c == '@' || c == '^' {
                        while let Some(&(i, c)) = chars.peek() {
                            if c.is_whitespace() || matches!(c, ',' | ')' | '(') {
                                break;
                            }
                            end = i + c.len_utf8();
                            chars.next();
                        }
                    }
                }
                tokens.push(Token { kind: TokenKind::Literal, start, end });
            }
            c if is_name_char(c) => {
                let mut end = start;
                while let Some(&(i, c)) = chars.peek() {
                    if !is_name_char(c) {
                        break;
                    }
                    end = i + c.len_utf8();
                    chars.next();
                }
                let word = &text[start..end];
                let followed_by_space = chars.peek().map_or(true, |&(_, c)| c.is_whitespace());
                let kind = match word.strip_suffix(':').and_then(keyword) {
                    Some(k) if followed_by_space => TokenKind::Keyword(k),
                    _ if word.bytes().all(|b| b.is_ascii_digit()) => match word.parse() {
                        Ok(n) => TokenKind::Int(n),
                        Err(_) => return Err(ParseError::at(text, end, "a number that fits", word)),
                    },
                    _ => TokenKind::Name(word.to_string()),
                };
                tokens.push(Token { kind, start, end });
            }
            other => {
                return Err(ParseError::at(
                    text,
                    start + other.len_utf8(),
                    "a name, keyword, IRI or punctuation",
                    &other.to_string(),
                ));
            }
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        start: text.len(),
        end: text.len(),
    });
    Ok(tokens)
}
