//! Tokenizer for the Logo dialect.
//!
//! Words are maximal runs of characters that are not whitespace, brackets,
//! parentheses, quotes or comment starters. A word that reads as a decimal
//! number becomes a number token; everything else (including operator words
//! such as `+` or `<=`) is an identifier. This mirrors the language family,
//! where `create-turtles` and `random-xcor` are single words.

use serde::{Deserialize, Serialize};

use crate::diagnostic::{codes, Diagnostic, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Identifier,
    Number,
    String,
    OpenBracket,
    CloseBracket,
    OpenParen,
    CloseParen,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, kind: TokenKind) -> bool {
        self.kind == kind
    }

    /// Numeric value of a number token.
    pub fn number(&self) -> Option<f64> {
        match self.kind {
            TokenKind::Number => self.lexeme.parse().ok(),
            _ => None,
        }
    }

    /// Contents of a string token without the quotes.
    pub fn string_value(&self) -> Option<&str> {
        match self.kind {
            TokenKind::String => Some(&self.lexeme[1..self.lexeme.len() - 1]),
            _ => None,
        }
    }
}

/// A `;` comment. `text` excludes the leading `;` and surrounding spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comment {
    pub text: String,
    pub span: Span,
}

/// Tokens plus the comment trivia that was skipped between them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<Comment>,
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '[' | ']' | '(' | ')' | '"' | ';')
}

pub(crate) fn looks_numeric(word: &str) -> bool {
    let body = word.strip_prefix('-').unwrap_or(word);
    let mut chars = body.chars();
    let starts_ok = match chars.next() {
        Some(c) if c.is_ascii_digit() => true,
        Some('.') => chars.next().is_some_and(|c| c.is_ascii_digit()),
        _ => false,
    };
    starts_ok
        && body
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+'))
        && body.parse::<f64>().is_ok_and(f64::is_finite)
}

/// Split `source` into tokens. Every unterminated string on any line is
/// reported; lexing resumes on the following line.
pub fn tokenize(source: &str) -> Result<Lexed, Vec<Diagnostic>> {
    let mut out = Lexed::default();
    let mut diagnostics = Vec::new();
    let mut iter = source.char_indices().peekable();

    while let Some(&(start, c)) = iter.peek() {
        if c.is_whitespace() {
            iter.next();
            continue;
        }
        let single = match c {
            '[' => Some(TokenKind::OpenBracket),
            ']' => Some(TokenKind::CloseBracket),
            '(' => Some(TokenKind::OpenParen),
            ')' => Some(TokenKind::CloseParen),
            _ => None,
        };
        if let Some(kind) = single {
            iter.next();
            out.tokens.push(Token {
                kind,
                lexeme: c.to_string(),
                span: Span::new(start, start + 1),
            });
            continue;
        }
        match c {
            ';' => {
                let end = line_end(source, start);
                while iter.peek().is_some_and(|&(i, _)| i < end) {
                    iter.next();
                }
                out.comments.push(Comment {
                    text: source[start + 1..end].trim().to_owned(),
                    span: Span::new(start, end),
                });
            }
            '"' => {
                iter.next();
                let line_stop = line_end(source, start);
                let close = source[start + 1..line_stop].find('"');
                match close {
                    Some(offset) => {
                        let end = start + 1 + offset + 1;
                        while iter.peek().is_some_and(|&(i, _)| i < end) {
                            iter.next();
                        }
                        out.tokens.push(Token {
                            kind: TokenKind::String,
                            lexeme: source[start..end].to_owned(),
                            span: Span::new(start, end),
                        });
                    }
                    None => {
                        while iter.peek().is_some_and(|&(i, _)| i < line_stop) {
                            iter.next();
                        }
                        diagnostics.push(Diagnostic::error(
                            codes::UNTERMINATED_STRING,
                            "This string is missing its closing quote.",
                            Span::new(start, line_stop),
                        ));
                    }
                }
            }
            _ => {
                let mut end = start;
                while let Some(&(i, ch)) = iter.peek() {
                    if is_delimiter(ch) {
                        break;
                    }
                    end = i + ch.len_utf8();
                    iter.next();
                }
                let word = &source[start..end];
                let kind = if looks_numeric(word) {
                    TokenKind::Number
                } else {
                    TokenKind::Identifier
                };
                out.tokens.push(Token {
                    kind,
                    lexeme: word.to_owned(),
                    span: Span::new(start, end),
                });
            }
        }
    }

    if diagnostics.is_empty() {
        Ok(out)
    } else {
        Err(diagnostics)
    }
}

fn line_end(source: &str, from: usize) -> usize {
    source[from..].find(['\n', '\r']).map_or(source.len(), |i| from + i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src)
            .unwrap()
            .tokens
            .into_iter()
            .map(|t| (t.kind, t.lexeme))
            .collect()
    }

    #[test]
    fn create_turtles_is_identifier_and_number() {
        assert_eq!(
            kinds("create-turtles 100"),
            vec![
                (TokenKind::Identifier, "create-turtles".into()),
                (TokenKind::Number, "100".into())
            ]
        );
    }

    #[test]
    fn empty_source_has_no_tokens() {
        assert_eq!(tokenize("").unwrap(), Lexed::default());
        assert!(tokenize("   \n\t").unwrap().tokens.is_empty());
    }

    #[test]
    fn unterminated_string_spans_to_end_of_line() {
        let src = "print \"hello\nfd 1";
        let diags = tokenize(src).unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, codes::UNTERMINATED_STRING);
        assert_eq!(&src[diags[0].span.range()], "\"hello");
    }

    #[test]
    fn reports_every_unterminated_string() {
        let diags = tokenize("print \"a\nprint \"b").unwrap_err();
        assert_eq!(diags.len(), 2);
    }

    #[test]
    fn comments_are_trivia() {
        let lexed = tokenize("; hi there\nfd 1 ; go").unwrap();
        assert_eq!(lexed.tokens.len(), 2);
        let texts: Vec<_> = lexed.comments.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(texts, ["hi there", "go"]);
    }

    #[test]
    fn brackets_split_words() {
        assert_eq!(
            kinds("[fd(1)]").into_iter().map(|(k, _)| k).collect::<Vec<_>>(),
            vec![
                TokenKind::OpenBracket,
                TokenKind::Identifier,
                TokenKind::OpenParen,
                TokenKind::Number,
                TokenKind::CloseParen,
                TokenKind::CloseBracket,
            ]
        );
    }

    #[test]
    fn numeric_words() {
        for w in ["10", "-5", "0.5", ".5", "-.25", "1e3", "2.5E-2"] {
            assert!(looks_numeric(w), "{w}");
        }
        for w in ["-", "+5", "inf", "nan", "1-2", "e5", "random-xcor", "1e999"] {
            assert!(!looks_numeric(w), "{w}");
        }
    }

    #[test]
    fn string_value_strips_quotes() {
        let lexed = tokenize("print \"hello world!\"").unwrap();
        assert_eq!(lexed.tokens[1].string_value(), Some("hello world!"));
    }
}
