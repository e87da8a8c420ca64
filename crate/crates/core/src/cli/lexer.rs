use crate::error::{Error, Result, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Str(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// Words with a fixed meaning in some grammar. Enumeration labels spelled
/// like these are printed quoted.
const KEYWORDS: &[&str] = &[
    "return", "do", "in", "if", "then", "else", "with", "handle", "fun", "handler", "true",
    "false", "theory", "op", "equation", "forall", "where", "empty", "unit", "bool", "fin", "enum",
    "model", "comodel",
];

/// Words that cannot name program variables.
pub(crate) const RESERVED: &[&str] = &[
    "return", "do", "in", "if", "then", "else", "with", "handle", "fun", "handler", "true", "false",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

const SYMBOLS: &[&str] = &[
    "->", "<-", "~>", "!=", "(", ")", "{", "}", "[", "]", ",", ";", ":", "!", "|", "+", "*", "=",
    "\\", ".",
];

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Splits source text into tokens. `#` starts a comment running to the end
/// of the line. A `-` continues an identifier when a letter or digit follows.
pub fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                {
                    let c = chars[i];
                    advance(&mut i, &mut line, &mut col, c);
                }
            }
            continue;
        }
        if ident_start(c) {
            let mut s = String::new();
            while i < chars.len() {
                let d = chars[i];
                let dash = d == '-'
                    && chars
                        .get(i + 1)
                        .is_some_and(|n| n.is_ascii_alphanumeric() || *n == '_');
                if !(ident_char(d) || dash) {
                    break;
                }
                s.push(d);
                advance(&mut i, &mut line, &mut col, d);
            }
            out.push(Token {
                tok: Tok::Ident(s),
                span,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                {
                    let c = chars[i];
                    advance(&mut i, &mut line, &mut col, c);
                }
            }
            let n = s
                .parse::<u64>()
                .map_err(|_| Error::syntax(span, format!("integer {s} is too large")))?;
            out.push(Token {
                tok: Tok::Int(n),
                span,
            });
            continue;
        }
        if c == '"' {
            advance(&mut i, &mut line, &mut col, c);
            let mut s = String::new();
            loop {
                let Some(&d) = chars.get(i) else {
                    return Err(Error::syntax(span, "unterminated string"));
                };
                advance(&mut i, &mut line, &mut col, d);
                match d {
                    '"' => break,
                    '\\' => {
                        let Some(&e) = chars.get(i) else {
                            return Err(Error::syntax(span, "unterminated string"));
                        };
                        advance(&mut i, &mut line, &mut col, e);
                        s.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            '"' | '\\' => e,
                            _ => {
                                return Err(Error::syntax(
                                    Span::new(line, col - 2),
                                    format!("unknown escape \\{e}"),
                                ))
                            }
                        });
                    }
                    _ => s.push(d),
                }
            }
            out.push(Token {
                tok: Tok::Str(s),
                span,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
            return Err(Error::syntax(span, format!("unexpected character {c:?}")));
        };
        for _ in 0..sym.chars().count() {
            {
                let c = chars[i];
                advance(&mut i, &mut line, &mut col, c);
            }
        }
        out.push(Token {
            tok: Tok::Sym(sym),
            span,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(line, col),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn arrows_and_dashed_names() {
        assert_eq!(
            toks("x->y get-put s'"),
            vec![
                Tok::Ident("x".into()),
                Tok::Sym("->"),
                Tok::Ident("y".into()),
                Tok::Ident("get-put".into()),
                Tok::Ident("s'".into()),
                Tok::Eof,
            ]
        );
        assert!(lex("a - b").is_err());
    }

    #[test]
    fn strings_comments_positions() {
        let ts = lex("print!(\"a\\\"b\") # comment\n  return").unwrap();
        assert_eq!(ts[2].tok, Tok::Sym("("));
        assert_eq!(ts[3].tok, Tok::Str("a\"b".into()));
        assert_eq!(ts[5].tok, Tok::Ident("return".into()));
        assert_eq!((ts[5].span.line, ts[5].span.column), (2, 3));
        assert_eq!((ts[6].span.line, ts[6].span.column), (2, 9));
    }

    #[test]
    fn bad_character() {
        assert!(matches!(
            lex("a @ b"),
            Err(Error::Syntax {
                line: 1,
                column: 3,
                ..
            })
        ));
    }
}
