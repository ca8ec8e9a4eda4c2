//! Identifier and type-name rules shared by the structure formats and the
//! CML emitter/parser.

/// `[A-Za-z_][A-Za-z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A type name is an identifier optionally followed by a bracketed,
/// comma-separated list of type names, written without whitespace
/// (`String`, `List<Question>`, `Map<String,Integer>`).
pub fn is_type_name(s: &str) -> bool {
    fn parse(s: &str) -> Option<&str> {
        let end = s
            .char_indices()
            .find(|&(_, c)| !(c.is_ascii_alphanumeric() || c == '_'))
            .map_or(s.len(), |(i, _)| i);
        if !is_identifier(&s[..end]) {
            return None;
        }
        let mut rest = &s[end..];
        if let Some(inner) = rest.strip_prefix('<') {
            rest = parse(inner)?;
            while let Some(next) = rest.strip_prefix(',') {
                rest = parse(next)?;
            }
            rest = rest.strip_prefix('>')?;
        }
        Some(rest)
    }
    matches!(parse(s), Some(""))
}

/// Maps an arbitrary string onto an identifier by replacing every
/// disallowed character with `_` and prefixing `_` when the first character
/// is a digit.
pub fn sanitize_identifier(s: &str) -> String {
    let mut out: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers() {
        assert!(is_identifier("Question_Reference"));
        assert!(is_identifier("_x1"));
        assert!(!is_identifier("1x"));
        assert!(!is_identifier(""));
        assert!(!is_identifier("a-b"));
    }

    #[test]
    fn type_names() {
        assert!(is_type_name("String"));
        assert!(is_type_name("List<Question>"));
        assert!(is_type_name("Map<String,List<Integer>>"));
        assert!(!is_type_name("List<>"));
        assert!(!is_type_name("List<A"));
        assert!(!is_type_name("List< A>"));
        assert!(!is_type_name("A>"));
    }

    #[test]
    fn sanitize() {
        assert_eq!(sanitize_identifier("Quiz.conclude"), "Quiz_conclude");
        assert_eq!(sanitize_identifier("9lives"), "_9lives");
        assert_eq!(sanitize_identifier(""), "_");
        assert!(is_identifier(&sanitize_identifier("a b-c/d")));
    }
}
