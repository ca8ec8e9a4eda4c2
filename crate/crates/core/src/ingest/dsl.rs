//! Line-oriented structure DSL:
//!
//! ```text
//! # comment
//! entity Topic extends Base {
//!     attr name: String;
//!     ref question -> Question;
//! }
//! ```

use super::json::check_structures;
use super::{Attribute, EntityStructure, Reference, INHERITANCE_FIELD};
use crate::error::{Error, Location, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    Colon,
    Semi,
    Arrow,
    Lt,
    Gt,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Comma => "`,`".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Location)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let loc = Location::new(lineno + 1, i + 1);
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphanumeric() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), loc));
                continue;
            }
            let tok = match c {
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ':' => Tok::Colon,
                ';' => Tok::Semi,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                ',' => Tok::Comma,
                '-' if chars.get(i + 1) == Some(&'>') => {
                    i += 1;
                    Tok::Arrow
                }
                other => {
                    return Err(Error::Syntax {
                        location: loc,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            };
            i += 1;
            out.push((tok, loc));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Location)>,
    pos: usize,
    end: Location,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn location(&self) -> Location {
        self.toks.get(self.pos).map_or(self.end, |(_, l)| *l)
    }

    fn error(&self, expected: &str) -> Error {
        let found = self.peek().map_or("end of input".to_string(), Tok::describe);
        Error::Syntax { location: self.location(), message: format!("expected {expected}, found {found}") }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&tok.describe()))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if crate::ident::is_identifier(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("identifier")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(&format!("`{kw}`"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn type_name(&mut self) -> Result<String> {
        let mut out = self.ident()?;
        if self.peek() == Some(&Tok::Lt) {
            self.pos += 1;
            out.push('<');
            out.push_str(&self.type_name()?);
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                out.push(',');
                out.push_str(&self.type_name()?);
            }
            self.expect(Tok::Gt)?;
            out.push('>');
        }
        Ok(out)
    }

    fn entity(&mut self) -> Result<EntityStructure> {
        self.keyword("entity")?;
        let mut e = EntityStructure::new(self.ident()?);
        if self.at_keyword("extends") {
            self.pos += 1;
            let parent = self.ident()?;
            e.references.push(Reference::inheritance(INHERITANCE_FIELD, parent));
        }
        self.expect(Tok::LBrace)?;
        loop {
            if self.peek() == Some(&Tok::RBrace) {
                self.pos += 1;
                break;
            }
            if self.at_keyword("attr") {
                self.pos += 1;
                let name = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.type_name()?;
                self.expect(Tok::Semi)?;
                e.attributes.push(Attribute::new(name, ty));
            } else if self.at_keyword("ref") {
                self.pos += 1;
                let field = self.ident()?;
                self.expect(Tok::Arrow)?;
                let target = self.ident()?;
                self.expect(Tok::Semi)?;
                e.references.push(Reference::association(field, target));
            } else {
                return Err(self.error("`attr`, `ref` or `}`"));
            }
        }
        Ok(e)
    }
}

/// Parses the structure DSL.
pub fn parse_structure_dsl(text: &str) -> Result<Vec<EntityStructure>> {
    let end = Location::new(text.lines().count().max(1), 1);
    let mut p = Parser { toks: lex(text)?, pos: 0, end };
    let mut out = Vec::new();
    while p.peek().is_some() {
        out.push(p.entity()?);
    }
    check_structures(&out)?;
    Ok(out)
}
