//! The `.ballots` text format.
//!
//! ```text
//! # four Dutchmen, three Germans, two Frenchmen
//! alternatives: milk beer wine
//! 4: milk > wine > beer
//! 3: beer > wine > milk
//! 2: wine > beer > milk
//! ```
//!
//! `#` starts a comment running to end of line. Blank lines are ignored. The
//! first significant line declares the alternatives; every following line is
//! a block `weight: top > ... > bottom`. Input may use LF or CRLF; output is
//! always LF with single spaces, so serialized profiles are byte-stable.

use thiserror::Error;

use crate::model::{is_valid_token, Profile, ProfileError, RawProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    MissingAlternatives,
    InvalidToken,
    DuplicateAlternative,
    BadWeight,
    NonPositiveWeight,
    UnknownAlternative,
    DuplicateInRanking,
    MissingInRanking,
    MalformedLine,
    NoBlocks,
}

impl ParseErrorKind {
    /// Stable diagnostic code.
    pub fn code(self) -> &'static str {
        match self {
            ParseErrorKind::MissingAlternatives => "E001",
            ParseErrorKind::InvalidToken => "E002",
            ParseErrorKind::DuplicateAlternative => "E003",
            ParseErrorKind::BadWeight => "E004",
            ParseErrorKind::NonPositiveWeight => "E005",
            ParseErrorKind::UnknownAlternative => "E006",
            ParseErrorKind::DuplicateInRanking => "E007",
            ParseErrorKind::MissingInRanking => "E008",
            ParseErrorKind::MalformedLine => "E009",
            ParseErrorKind::NoBlocks => "E010",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {} {message}", kind.code())]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// 1-based line; 0 when the error concerns the whole document.
    pub line: usize,
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

struct Line<'a> {
    number: usize,
    raw: &'a str,
    text: &'a str,
}

impl Line<'_> {
    fn error(&self, kind: ParseErrorKind, at: &str, message: impl Into<String>) -> ParseError {
        // `at` is always a subslice of `raw`.
        let offset = at.as_ptr() as usize - self.raw.as_ptr() as usize;
        ParseError { kind, line: self.number, column: self.raw[..offset].chars().count() + 1, message: message.into() }
    }
}

fn significant_lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.split('\n').enumerate().filter_map(|(i, raw)| {
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        (!trimmed.is_empty()).then(|| Line { number: i + 1, raw, text: trimmed })
    })
}

/// Reads a profile from `.ballots` text.
pub fn parse_profile(text: &str) -> Result<Profile, ParseError> {
    let mut lines = significant_lines(text);
    let header = lines.next().ok_or_else(|| ParseError {
        kind: ParseErrorKind::MissingAlternatives,
        line: 0,
        column: 0,
        message: "document has no alternatives line".into(),
    })?;
    let names = match header.text.strip_prefix("alternatives:") {
        Some(rest) => rest,
        None => {
            return Err(header.error(
                ParseErrorKind::MissingAlternatives,
                header.text,
                "expected `alternatives: t1 t2 ...`",
            ))
        }
    };
    let mut alternatives: Vec<&str> = Vec::new();
    for token in names.split_whitespace() {
        if !is_valid_token(token) {
            return Err(header.error(
                ParseErrorKind::InvalidToken,
                token,
                format!("invalid alternative name {token:?}"),
            ));
        }
        if alternatives.contains(&token) {
            return Err(header.error(
                ParseErrorKind::DuplicateAlternative,
                token,
                format!("alternative {token} is listed twice"),
            ));
        }
        alternatives.push(token);
    }
    if alternatives.is_empty() {
        return Err(header.error(ParseErrorKind::MissingAlternatives, header.text, "no alternatives declared"));
    }

    let mut blocks = Vec::new();
    for line in lines {
        let Some((weight_text, ranking_text)) = line.text.split_once(':') else {
            return Err(line.error(ParseErrorKind::MalformedLine, line.text, "expected `weight: a > b > ...`"));
        };
        let weight_text = weight_text.trim();
        let weight: i64 = weight_text.parse().map_err(|_| {
            line.error(ParseErrorKind::BadWeight, weight_text, format!("weight {weight_text:?} is not an integer"))
        })?;
        if weight <= 0 {
            return Err(line.error(
                ParseErrorKind::NonPositiveWeight,
                weight_text,
                format!("weight must be positive, got {weight}"),
            ));
        }
        let mut ranking: Vec<&str> = Vec::with_capacity(alternatives.len());
        for part in ranking_text.split('>') {
            let token = part.trim();
            if token.is_empty() || token.contains(char::is_whitespace) {
                return Err(line.error(
                    ParseErrorKind::MalformedLine,
                    if token.is_empty() { part } else { token },
                    "each position must hold exactly one alternative",
                ));
            }
            if !alternatives.contains(&token) {
                return Err(line.error(
                    ParseErrorKind::UnknownAlternative,
                    token,
                    format!("unknown alternative {token}"),
                ));
            }
            if ranking.contains(&token) {
                return Err(line.error(
                    ParseErrorKind::DuplicateInRanking,
                    token,
                    format!("{token} appears more than once"),
                ));
            }
            ranking.push(token);
        }
        if let Some(missing) = alternatives.iter().find(|a| !ranking.contains(a)) {
            return Err(line.error(
                ParseErrorKind::MissingInRanking,
                ranking_text,
                format!("ranking is missing {missing}"),
            ));
        }
        blocks.push((weight, ranking.into_iter().map(String::from).collect()));
    }
    if blocks.is_empty() {
        return Err(ParseError {
            kind: ParseErrorKind::NoBlocks,
            line: 0,
            column: 0,
            message: "at least one ballot block is required".into(),
        });
    }
    Profile::validate(RawProfile { alternatives: alternatives.into_iter().map(String::from).collect(), blocks })
        .map_err(|e: ProfileError| ParseError {
            kind: ParseErrorKind::MalformedLine,
            line: 0,
            column: 0,
            message: e.to_string(),
        })
}

/// Canonical text of `p`: alternatives in declaration order, blocks in order.
pub fn serialize_profile(p: &Profile) -> String {
    let mut out = String::from("alternatives:");
    for alt in p.alternatives() {
        out.push(' ');
        out.push_str(alt.as_str());
    }
    out.push('\n');
    for block in p.blocks() {
        let names: Vec<&str> = block.ranking.as_slice().iter().map(|&a| p.name(a).as_str()).collect();
        out.push_str(&format!("{}: {}\n", block.weight, names.join(" > ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::profile;

    const DRINKS: &str =
        "alternatives: milk beer wine\n4: milk > wine > beer\n3: beer > wine > milk\n2: wine > beer > milk\n";

    fn kind(text: &str) -> ParseErrorKind {
        parse_profile(text).unwrap_err().kind
    }

    #[test]
    fn parses_drinks() {
        let p = parse_profile(DRINKS).unwrap();
        assert_eq!(
            p,
            profile("milk beer wine", &[(4, "milk wine beer"), (3, "beer wine milk"), (2, "wine beer milk")])
        );
        assert_eq!(serialize_profile(&p), DRINKS);
    }

    #[test]
    fn singleton() {
        let p = parse_profile("alternatives: a\n1: a\n").unwrap();
        assert_eq!((p.m(), p.voters()), (1, 1));
        assert_eq!(serialize_profile(&p), "alternatives: a\n1: a\n");
    }

    #[test]
    fn comments_blank_lines_and_crlf() {
        let text = "# lunch\r\n\r\nalternatives: milk beer wine # drinks\r\n4: milk>wine>beer\r\n3 : beer > wine > milk\r\n  2: wine > beer > milk   # french\r\n";
        assert_eq!(serialize_profile(&parse_profile(text).unwrap()), DRINKS);
    }

    #[test]
    fn paradox_serializes_with_four_blocks() {
        let p = profile("a b c d", &[(2, "d a b c"), (1, "d c a b"), (1, "c a b d"), (2, "b c a d")]);
        assert_eq!(
            serialize_profile(&p),
            "alternatives: a b c d\n2: d > a > b > c\n1: d > c > a > b\n1: c > a > b > d\n2: b > c > a > d\n"
        );
    }

    #[test]
    fn error_classes() {
        assert_eq!(kind("alternatives: a b\n1: a > a\n"), ParseErrorKind::DuplicateInRanking);
        assert_eq!(kind("alternatives: a b\n1: a > z\n"), ParseErrorKind::UnknownAlternative);
        assert_eq!(kind("alternatives: a b c\n1: a > b\n"), ParseErrorKind::MissingInRanking);
        assert_eq!(kind("alternatives: a b\n0: a > b\n"), ParseErrorKind::NonPositiveWeight);
        assert_eq!(kind("alternatives: a b\n-1: a > b\n"), ParseErrorKind::NonPositiveWeight);
        assert_eq!(kind("alternatives: a b\nx: a > b\n"), ParseErrorKind::BadWeight);
        assert_eq!(kind("alternatives: a a\n1: a\n"), ParseErrorKind::DuplicateAlternative);
        assert_eq!(kind("1: a > b\n"), ParseErrorKind::MissingAlternatives);
        assert_eq!(kind("# nothing\n"), ParseErrorKind::MissingAlternatives);
        assert_eq!(kind("alternatives:\n1: a\n"), ParseErrorKind::MissingAlternatives);
        assert_eq!(kind("alternatives: a b\n"), ParseErrorKind::NoBlocks);
        assert_eq!(kind("alternatives: a b\n1 a > b\n"), ParseErrorKind::MalformedLine);
        assert_eq!(kind("alternatives: a b\n1: a b\n"), ParseErrorKind::MalformedLine);
        assert_eq!(kind("alternatives: a b\n1: a > > b\n"), ParseErrorKind::MalformedLine);
        assert_eq!(kind("alternatives: a,b\n1: a,b\n"), ParseErrorKind::InvalidToken);
        let codes: std::collections::HashSet<_> = [
            ParseErrorKind::MissingAlternatives,
            ParseErrorKind::InvalidToken,
            ParseErrorKind::DuplicateAlternative,
            ParseErrorKind::BadWeight,
            ParseErrorKind::NonPositiveWeight,
            ParseErrorKind::UnknownAlternative,
            ParseErrorKind::DuplicateInRanking,
            ParseErrorKind::MissingInRanking,
            ParseErrorKind::MalformedLine,
            ParseErrorKind::NoBlocks,
        ]
        .iter()
        .map(|k| k.code())
        .collect();
        assert_eq!(codes.len(), 10);
    }

    #[test]
    fn positions_point_at_the_offending_token() {
        let err = parse_profile("alternatives: a b\n\n3: b > a > a\n").unwrap_err();
        assert_eq!((err.line, err.column), (3, 12));
        assert_eq!(err.to_string(), "3:12: E007 a appears more than once");
        let err = parse_profile("alternatives: a b\r\n 0: a > b\r\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 2));
    }
}
