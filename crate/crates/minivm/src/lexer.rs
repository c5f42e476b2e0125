use crate::error::LoadError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Keyword(&'static str),
    Int(i64),
    Real(f64),
    Str(String),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub column: u32,
}

const KEYWORDS: &[&str] = &[
    "class",
    "interface",
    "extends",
    "implements",
    "var",
    "def",
    "pure",
    "public",
    "private",
    "main",
    "if",
    "else",
    "while",
    "return",
    "new",
    "self",
    "true",
    "false",
    "null",
];

const SYMBOLS: &[&str] = &[
    "==", "!=", "<=", ">=", "&&", "||", "{", "}", "(", ")", ";", ",", ".", "=", "<", ">", "+", "-",
    "*", "/", "%", "!",
];

/// Splits MiniObj source into tokens. `//` starts a line comment.
pub fn tokenize(src: &str) -> Result<Vec<Token>, LoadError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let err = |message: String, line, column| LoadError::Syntax {
        message,
        line,
        column,
    };
    while i < chars.len() {
        let c = chars[i];
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
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Keyword(k),
                None => Tok::Ident(word),
            }
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut real = false;
            if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            if real {
                Tok::Real(text.parse().expect("digits parse as f64"))
            } else {
                Tok::Int(
                    text.parse().map_err(|_| {
                        err(format!("integer literal {text} out of range"), line, col)
                    })?,
                )
            }
        } else if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(err("unterminated string literal".into(), line, col))
                    }
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        let esc = match chars.get(i + 1) {
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some('"') => '"',
                            Some('\\') => '\\',
                            _ => {
                                return Err(err(
                                    "bad escape in string literal".into(),
                                    line,
                                    col + (i - start) as u32,
                                ))
                            }
                        };
                        s.push(esc);
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            Tok::Str(s)
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    i += s.len();
                    Tok::Sym(s)
                }
                None => return Err(err(format!("unexpected character `{c}`"), line, col)),
            }
        };
        col += (i - start) as u32;
        out.push(Token {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basics() {
        assert_eq!(
            toks("var x = 1.5 <= y; // done"),
            vec![
                Tok::Keyword("var"),
                Tok::Ident("x".into()),
                Tok::Sym("="),
                Tok::Real(1.5),
                Tok::Sym("<="),
                Tok::Ident("y".into()),
                Tok::Sym(";"),
                Tok::Eof
            ]
        );
        assert_eq!(toks(r#"print("a\"b")"#)[2], Tok::Str("a\"b".into()));
        assert_eq!(toks("v.size()")[1], Tok::Sym("."));
        assert_eq!(toks("3.x")[..2], [Tok::Int(3), Tok::Sym(".")]);
    }

    #[test]
    fn positions() {
        let t = tokenize("a\n  bb").unwrap();
        assert_eq!((t[1].line, t[1].column), (2, 3));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            tokenize("a # b"),
            Err(LoadError::Syntax {
                line: 1,
                column: 3,
                ..
            })
        ));
        assert!(tokenize("\"open").is_err());
        assert!(tokenize("99999999999999999999").is_err());
    }
}
