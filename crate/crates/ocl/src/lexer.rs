//! Tokenizer for constraint files and OCL expressions.

use crate::error::OclError;
use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Ident,
    Int,
    Real,
    Str,
    Bool,
    Operator,
    Punct,
    AtPre,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Raw source slice. String literals keep their quotes and escapes.
    pub text: String,
    pub span: SourceSpan,
    /// Byte offset of the first character.
    pub offset: usize,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_keyword(&self, text: &str) -> bool {
        self.is(TokenKind::Keyword, text)
    }

    pub fn is_punct(&self, text: &str) -> bool {
        self.is(TokenKind::Punct, text)
    }

    pub fn is_op(&self, text: &str) -> bool {
        self.is(TokenKind::Operator, text)
    }

    pub fn end_offset(&self) -> usize {
        self.offset + self.text.len()
    }
}

pub const KEYWORDS: &[&str] = &[
    "context", "inv", "pre", "post", "self", "result", "and", "or", "xor", "not", "implies",
];

const TWO_CHAR_OPS: &[&str] = &["->", "<>", "<=", ">="];
const ONE_CHAR_OPS: &[char] = &['=', '<', '>', '+', '-', '*', '/'];
const PUNCT: &[char] = &['.', ':', ',', '(', ')', '|'];

/// Splits `source` into tokens, skipping whitespace and `--` line comments.
/// The returned list always ends with an [`TokenKind::Eof`] token.
pub fn tokenize(source: &str) -> Result<Vec<Token>, OclError> {
    Lexer::new(source).run()
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
    tokens: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            col: 1,
            tokens: Vec::new(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn run(mut self) -> Result<Vec<Token>, OclError> {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            if c == '-' && self.peek_at(1) == Some('-') {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
                continue;
            }
            self.lex_token(c)?;
        }
        self.tokens.push(Token {
            kind: TokenKind::Eof,
            text: String::new(),
            span: SourceSpan::new(self.line, self.col, 0),
            offset: self.pos,
        });
        Ok(self.tokens)
    }

    fn lex_token(&mut self, c: char) -> Result<(), OclError> {
        let start = self.pos;
        let (line, col) = (self.line, self.col);
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                self.bump();
            }
            let word = &self.src[start..self.pos];
            if word == "true" || word == "false" {
                TokenKind::Bool
            } else if KEYWORDS.contains(&word) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            }
        } else if c.is_ascii_digit() {
            self.lex_number()
        } else if c == '\'' {
            self.lex_string(line, col)?;
            TokenKind::Str
        } else if c == '@' {
            let rest = &self.src[self.pos + 1..];
            let follows_ident = rest[3.min(rest.len())..]
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_');
            if !rest.starts_with("pre") || follows_ident {
                return Err(OclError::Lex {
                    message: "expected `@pre`".into(),
                    span: SourceSpan::new(line, col, 1),
                });
            }
            for _ in 0..4 {
                self.bump();
            }
            TokenKind::AtPre
        } else if TWO_CHAR_OPS
            .iter()
            .any(|op| self.src[self.pos..].starts_with(op))
        {
            self.bump();
            self.bump();
            TokenKind::Operator
        } else if c == ':' && self.peek_at(1) == Some(':') {
            self.bump();
            self.bump();
            TokenKind::Punct
        } else if ONE_CHAR_OPS.contains(&c) {
            self.bump();
            TokenKind::Operator
        } else if PUNCT.contains(&c) {
            self.bump();
            TokenKind::Punct
        } else {
            return Err(OclError::Lex {
                message: format!("unexpected character `{c}`"),
                span: SourceSpan::new(line, col, 1),
            });
        };
        let text = &self.src[start..self.pos];
        self.tokens.push(Token {
            kind,
            text: text.to_string(),
            span: SourceSpan::new(line, col, text.chars().count() as u32),
            offset: start,
        });
        Ok(())
    }

    fn lex_number(&mut self) -> TokenKind {
        let mut kind = TokenKind::Int;
        self.eat_digits();
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            self.eat_digits();
            kind = TokenKind::Real;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let digit_at = match self.peek_at(1) {
                Some('+' | '-') => 2,
                _ => 1,
            };
            if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                for _ in 0..digit_at {
                    self.bump();
                }
                self.eat_digits();
                kind = TokenKind::Real;
            }
        }
        kind
    }

    fn eat_digits(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
    }

    fn lex_string(&mut self, line: u32, col: u32) -> Result<(), OclError> {
        self.bump();
        loop {
            match self.bump() {
                None | Some('\n') => {
                    return Err(OclError::Lex {
                        message: "unterminated string literal".into(),
                        span: SourceSpan::new(line, col, 1),
                    })
                }
                Some('\'') => return Ok(()),
                Some('\\') => {
                    let (el, ec) = (self.line, self.col);
                    match self.bump() {
                        Some('\\' | '\'' | 'n' | 't') => {}
                        _ => {
                            return Err(OclError::Lex {
                                message: "invalid escape sequence".into(),
                                span: SourceSpan::new(el, ec.saturating_sub(1), 2),
                            })
                        }
                    }
                }
                Some(_) => {}
            }
        }
    }
}

/// Decodes the raw text of a string-literal token.
pub fn unquote(raw: &str) -> String {
    let inner = &raw[1..raw.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(other) => out.push(other),
                None => {}
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Encodes `s` as a single-quoted string literal.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}
