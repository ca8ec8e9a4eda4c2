use super::{
    AggregateNode, ApplicationNode, AttributeNode, BoundedContextNode, CmlDocument, ContextMapNode, CoordinationNode,
    EntityNode, OperationNode, ReferenceNode, RelationshipNode, ServiceNode, StepNode,
};
use crate::error::{Error, Location, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Comment(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    PathSep,
    Dash,
    Lt,
    Gt,
    UpDown,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Comment(_) => "comment".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::PathSep => "`::`".into(),
            Tok::Dash => "`-`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::UpDown => "`[U]-[D]`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn syntax(location: Location, message: impl Into<String>) -> Error {
    Error::Syntax { location, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, Location)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let here = Location::new(line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let rest = &chars[i..];
        let starts = |s: &str| rest.len() >= s.chars().count() && s.chars().zip(rest).all(|(a, b)| a == *b);
        let (tok, len) = if starts("//") {
            let end = rest.iter().position(|&ch| ch == '\n').unwrap_or(rest.len());
            let body: String = rest[2..end].iter().collect();
            let body = body.strip_prefix(' ').map(str::to_string).unwrap_or(body);
            (Tok::Comment(body), end)
        } else if starts("[U]-[D]") {
            (Tok::UpDown, 7)
        } else if starts("::") {
            (Tok::PathSep, 2)
        } else if c == '_' || c.is_ascii_alphabetic() {
            let end = rest.iter().position(|&ch| !(ch == '_' || ch.is_ascii_alphanumeric())).unwrap_or(rest.len());
            (Tok::Ident(rest[..end].iter().collect()), end)
        } else {
            let t = match c {
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                '-' => Tok::Dash,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                _ => return Err(syntax(here, format!("unexpected character {c:?}"))),
            };
            (t, 1)
        };
        out.push((tok, here));
        i += len;
        col += len;
    }
    out.push((Tok::Eof, Location::new(line, col)));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Location)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn location(&self) -> Location {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn comments(&mut self) -> Vec<String> {
        let mut out = Vec::new();
        while let Tok::Comment(c) = self.peek() {
            out.push(c.clone());
            self.pos += 1;
        }
        out
    }

    fn unexpected(&self, expected: &str) -> Error {
        syntax(self.location(), format!("expected {expected}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    /// Error for an identifier in a keyword position.
    fn outside_subset(&self, expected: &str) -> Error {
        match self.peek() {
            Tok::Ident(s) => syntax(
                self.location(),
                format!("`{s}` is outside supported subset (expected {expected})"),
            ),
            _ => self.unexpected(expected),
        }
    }

    fn document(&mut self) -> Result<CmlDocument> {
        let comments = self.comments();
        if !self.at_keyword("ContextMap") {
            return Err(self.outside_subset("`ContextMap`"));
        }
        let mut context_map = self.context_map()?;
        context_map.comments = comments;
        let mut contexts = Vec::new();
        loop {
            let comments = self.comments();
            if *self.peek() == Tok::Eof {
                return Ok(CmlDocument { context_map, contexts, trailing_comments: comments });
            }
            if !self.at_keyword("BoundedContext") {
                return Err(self.outside_subset("`BoundedContext`"));
            }
            let mut bc = self.bounded_context()?;
            bc.comments = comments;
            contexts.push(bc);
        }
    }

    fn context_map(&mut self) -> Result<ContextMapNode> {
        self.keyword("ContextMap")?;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut node = ContextMapNode { name, ..Default::default() };
        let mut pending = self.comments();
        if self.at_keyword("contains") {
            // comments before `contains` have no node of their own; keep them
            // on the map
            node.comments.append(&mut pending);
            self.bump();
            node.contains.push(self.ident()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                node.contains.push(self.ident()?);
            }
            pending = self.comments();
        }
        loop {
            if *self.peek() == Tok::RBrace {
                self.bump();
                node.trailing_comments = pending;
                return Ok(node);
            }
            let upstream = match self.peek() {
                Tok::Ident(_) => self.ident()?,
                _ => return Err(self.unexpected("relationship or `}`")),
            };
            if *self.peek() != Tok::UpDown {
                if let Tok::Ident(_) = self.peek() {
                    return Err(syntax(
                        self.location(),
                        format!("relationship form `{}` is outside supported subset (expected `[U]-[D]`)", upstream),
                    ));
                }
                return Err(self.unexpected("`[U]-[D]`"));
            }
            self.bump();
            let downstream = self.ident()?;
            node.relationships.push(RelationshipNode { comments: pending, upstream, downstream });
            pending = self.comments();
        }
    }

    fn bounded_context(&mut self) -> Result<BoundedContextNode> {
        self.keyword("BoundedContext")?;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut node = BoundedContextNode { name, ..Default::default() };
        loop {
            let comments = self.comments();
            if *self.peek() == Tok::RBrace {
                self.bump();
                node.trailing_comments = comments;
                return Ok(node);
            }
            if self.at_keyword("Application") && node.application.is_none() && node.aggregates.is_empty() {
                let mut app = self.application()?;
                app.comments = comments;
                node.application = Some(app);
            } else if self.at_keyword("Aggregate") {
                let mut agg = self.aggregate()?;
                agg.comments = comments;
                node.aggregates.push(agg);
            } else if node.aggregates.is_empty() && node.application.is_none() {
                return Err(self.outside_subset("`Application`, `Aggregate` or `}`"));
            } else {
                return Err(self.outside_subset("`Aggregate` or `}`"));
            }
        }
    }

    fn application(&mut self) -> Result<ApplicationNode> {
        self.keyword("Application")?;
        self.expect(Tok::LBrace)?;
        let mut node = ApplicationNode::default();
        loop {
            let comments = self.comments();
            if *self.peek() == Tok::RBrace {
                self.bump();
                node.trailing_comments = comments;
                return Ok(node);
            }
            if self.at_keyword("Service") && node.coordinations.is_empty() {
                let mut s = self.service()?;
                s.comments = comments;
                node.services.push(s);
            } else if self.at_keyword("Coordination") {
                let mut k = self.coordination()?;
                k.comments = comments;
                node.coordinations.push(k);
            } else if node.coordinations.is_empty() {
                return Err(self.outside_subset("`Service`, `Coordination` or `}`"));
            } else {
                return Err(self.outside_subset("`Coordination` or `}`"));
            }
        }
    }

    fn service(&mut self) -> Result<ServiceNode> {
        self.keyword("Service")?;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut node = ServiceNode { name, ..Default::default() };
        loop {
            let comments = self.comments();
            if *self.peek() == Tok::RBrace {
                self.bump();
                node.trailing_comments = comments;
                return Ok(node);
            }
            if !self.at_keyword("void") {
                return Err(self.outside_subset("`void` or `}`"));
            }
            self.bump();
            let name = self.ident()?;
            self.expect(Tok::LParen)?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Semi)?;
            node.operations.push(OperationNode { comments, name });
        }
    }

    fn coordination(&mut self) -> Result<CoordinationNode> {
        self.keyword("Coordination")?;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut node = CoordinationNode { name, ..Default::default() };
        loop {
            let comments = self.comments();
            if *self.peek() == Tok::RBrace {
                self.bump();
                node.trailing_comments = comments;
                return Ok(node);
            }
            let context = self.ident()?;
            self.expect(Tok::PathSep)?;
            let service = self.ident()?;
            self.expect(Tok::PathSep)?;
            let operation = self.ident()?;
            self.expect(Tok::Semi)?;
            node.steps.push(StepNode { comments, context, service, operation });
        }
    }

    fn aggregate(&mut self) -> Result<AggregateNode> {
        self.keyword("Aggregate")?;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut node = AggregateNode { name, ..Default::default() };
        loop {
            let comments = self.comments();
            if *self.peek() == Tok::RBrace {
                self.bump();
                node.trailing_comments = comments;
                return Ok(node);
            }
            if !self.at_keyword("Entity") {
                return Err(self.outside_subset("`Entity` or `}`"));
            }
            let mut e = self.entity()?;
            e.comments = comments;
            node.entities.push(e);
        }
    }

    fn entity(&mut self) -> Result<EntityNode> {
        self.keyword("Entity")?;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut node = EntityNode { name, ..Default::default() };
        let mut comments = self.comments();
        if self.at_keyword("aggregateRoot") {
            node.aggregate_root = true;
            node.comments.append(&mut comments);
            self.bump();
            comments = self.comments();
        }
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    node.trailing_comments = comments;
                    return Ok(node);
                }
                Tok::Dash => {
                    self.bump();
                    let target = self.ident()?;
                    let name = self.ident()?;
                    node.references.push(ReferenceNode { comments, target, name });
                }
                Tok::Ident(_) if node.references.is_empty() => {
                    let ty = self.type_name()?;
                    let name = self.ident()?;
                    node.attributes.push(AttributeNode { comments, ty, name });
                }
                Tok::Ident(_) => {
                    return Err(syntax(self.location(), "attributes must precede references"));
                }
                _ => return Err(self.unexpected("attribute, reference or `}`")),
            }
            comments = self.comments();
        }
    }

    fn type_name(&mut self) -> Result<String> {
        let mut out = self.ident()?;
        if *self.peek() == Tok::Lt {
            self.bump();
            out.push('<');
            out.push_str(&self.type_name()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                out.push(',');
                out.push_str(&self.type_name()?);
            }
            self.expect(Tok::Gt)?;
            out.push('>');
        }
        Ok(out)
    }
}

/// Parses a document of the subset. Whether coordination steps resolve is
/// left to [`super::validate`].
pub fn parse(text: &str) -> Result<CmlDocument> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    p.document()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cml::emit;

    const SAMPLE: &str = "\
// header
ContextMap Decomposition {
    contains Cluster0, Cluster1
    // B references C
    Cluster1 [U]-[D] Cluster0
}

BoundedContext Cluster0 {
    Application {
        Service Cluster0Service {
            void rA();
        }
        Coordination f3 {
            Cluster0::Cluster0Service::rA;
            Cluster1::Cluster1Service::wC;
        }
    }
    Aggregate Cluster0Aggregate {
        // accesses: external 1/1 (100.00%), local 0/0 (0.00%)
        Entity A {
            aggregateRoot
            List<String> names
            - C_Reference c
        }
        // generated reference to Cluster1.C
        Entity C_Reference { }
    }
}

BoundedContext Cluster1 { }
";

    #[test]
    fn parses_and_reemits_sample() {
        let doc = parse(SAMPLE).unwrap();
        assert_eq!(doc.context_map.comments, vec!["header"]);
        assert_eq!(doc.context_map.relationships[0].comments, vec!["B references C"]);
        let c0 = &doc.contexts[0];
        let e = &c0.aggregates[0].entities[0];
        assert!(e.aggregate_root);
        assert_eq!(e.attributes[0].ty, "List<String>");
        assert_eq!(c0.application.as_ref().unwrap().coordinations[0].steps.len(), 2);
        assert_eq!(emit(&doc).unwrap(), SAMPLE);
    }

    #[test]
    fn two_segment_step_fails_at_the_semicolon() {
        let text = "ContextMap M { }\nBoundedContext C {\n    Application {\n        Coordination k {\n            C::S;\n        }\n    }\n}\n";
        match parse(text) {
            Err(Error::Syntax { location, message }) => {
                assert_eq!(location, Location::new(5, 17));
                assert!(message.contains("`::`"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keyword_is_outside_subset() {
        let err = parse("ContextMap M { }\nEventFlow X { }\n").unwrap_err();
        assert!(err.to_string().contains("outside supported subset"), "{err}");
        assert!(err.to_string().starts_with("2:1"), "{err}");
        let err = parse("ContextMap M { }\nBoundedContext B {\n    Domain D { }\n}\n").unwrap_err();
        assert!(err.to_string().contains("outside supported subset"), "{err}");
    }

    #[test]
    fn lexical_errors_carry_positions() {
        let err = parse("ContextMap M {\n  @\n}").unwrap_err();
        assert!(err.to_string().starts_with("2:3"), "{err}");
    }

    #[test]
    fn trailing_comments_stay_in_their_block() {
        let text = "ContextMap M {\n    // nothing here\n}\n\n// end\n";
        let doc = parse(text).unwrap();
        assert_eq!(doc.context_map.trailing_comments, vec!["nothing here"]);
        assert_eq!(doc.trailing_comments, vec!["end"]);
        assert_eq!(emit(&doc).unwrap(), text);
    }
}
