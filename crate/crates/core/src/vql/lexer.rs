//! Tokenizer for VQL text. Keywords are case-insensitive.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::SyntaxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Visualize,
    Select,
    From,
    Join,
    On,
    As,
    Where,
    Group,
    By,
    Having,
    Order,
    Asc,
    Desc,
    Limit,
    Bin,
    And,
    Or,
    Not,
    In,
    Like,
    Between,
    Distinct,
    Null,
}

const KEYWORDS: &[(&str, Keyword)] = &[
    ("VISUALIZE", Keyword::Visualize),
    ("SELECT", Keyword::Select),
    ("FROM", Keyword::From),
    ("JOIN", Keyword::Join),
    ("ON", Keyword::On),
    ("AS", Keyword::As),
    ("WHERE", Keyword::Where),
    ("GROUP", Keyword::Group),
    ("BY", Keyword::By),
    ("HAVING", Keyword::Having),
    ("ORDER", Keyword::Order),
    ("ASC", Keyword::Asc),
    ("DESC", Keyword::Desc),
    ("LIMIT", Keyword::Limit),
    ("BIN", Keyword::Bin),
    ("AND", Keyword::And),
    ("OR", Keyword::Or),
    ("NOT", Keyword::Not),
    ("IN", Keyword::In),
    ("LIKE", Keyword::Like),
    ("BETWEEN", Keyword::Between),
    ("DISTINCT", Keyword::Distinct),
    ("NULL", Keyword::Null),
];

impl Keyword {
    pub fn text(self) -> &'static str {
        KEYWORDS
            .iter()
            .find(|(_, k)| *k == self)
            .map(|(s, _)| *s)
            .unwrap_or("?")
    }

    fn lookup(word: &str) -> Option<Keyword> {
        KEYWORDS
            .iter()
            .find(|(s, _)| s.eq_ignore_ascii_case(word))
            .map(|(_, k)| *k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Kw(Keyword),
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    Comma,
    Dot,
    LParen,
    RParen,
    Star,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Semicolon,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Kw(k) => write!(f, "keyword {}", k.text()),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(i) => write!(f, "number {i}"),
            Tok::Real(r) => write!(f, "number {r}"),
            Tok::Str(s) => write!(f, "string '{s}'"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Ne => f.write_str("`!=`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Semicolon => f.write_str("`;`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    /// Byte offset into the source text.
    pub pos: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            b',' => Some(Tok::Comma),
            b'.' if !bytes.get(i + 1).is_some_and(u8::is_ascii_digit) => Some(Tok::Dot),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'*' => Some(Tok::Star),
            b';' => Some(Tok::Semicolon),
            b'=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, pos: start });
            i += 1;
            continue;
        }
        match c {
            b'!' | b'<' | b'>' => {
                let next = bytes.get(i + 1).copied();
                let (tok, len) = match (c, next) {
                    (b'!', Some(b'=')) => (Tok::Ne, 2),
                    (b'<', Some(b'>')) => (Tok::Ne, 2),
                    (b'<', Some(b'=')) => (Tok::Le, 2),
                    (b'>', Some(b'=')) => (Tok::Ge, 2),
                    (b'<', _) => (Tok::Lt, 1),
                    (b'>', _) => (Tok::Gt, 1),
                    _ => {
                        return Err(SyntaxError::new(start, "`!=`", "`!`"));
                    }
                };
                out.push(Token { tok, pos: start });
                i += len;
            }
            b'\'' | b'"' => {
                let quote = c;
                let mut s = String::new();
                i += 1;
                loop {
                    let Some(&b) = bytes.get(i) else {
                        return Err(SyntaxError::new(start, "closing quote", "end of input"));
                    };
                    if b == quote {
                        if bytes.get(i + 1) == Some(&quote) {
                            s.push(quote as char);
                            i += 2;
                            continue;
                        }
                        i += 1;
                        break;
                    }
                    let ch = src[i..].chars().next().unwrap_or('\u{fffd}');
                    s.push(ch);
                    i += ch.len_utf8();
                }
                out.push(Token {
                    tok: Tok::Str(s),
                    pos: start,
                });
            }
            b'-' | b'0'..=b'9' | b'.' => {
                let mut j = i;
                if c == b'-' {
                    j += 1;
                    if !bytes
                        .get(j)
                        .is_some_and(|b| b.is_ascii_digit() || *b == b'.')
                    {
                        return Err(SyntaxError::new(start, "number", "`-`"));
                    }
                }
                let mut seen_dot = false;
                while let Some(&b) = bytes.get(j) {
                    if b.is_ascii_digit() {
                        j += 1;
                    } else if b == b'.' && !seen_dot {
                        seen_dot = true;
                        j += 1;
                    } else {
                        break;
                    }
                }
                let text = &src[i..j];
                let tok = if seen_dot {
                    text.parse::<f64>()
                        .map(Tok::Real)
                        .map_err(|_| SyntaxError::new(start, "number", text))?
                } else {
                    text.parse::<i64>()
                        .map(Tok::Int)
                        .map_err(|_| SyntaxError::new(start, "64-bit integer", text))?
                };
                out.push(Token { tok, pos: start });
                i = j;
            }
            b'`' => {
                let close = src[i + 1..]
                    .find('`')
                    .ok_or_else(|| SyntaxError::new(start, "closing backtick", "end of input"))?;
                let name = &src[i + 1..i + 1 + close];
                if name.is_empty() {
                    return Err(SyntaxError::new(start, "identifier", "``"));
                }
                out.push(Token {
                    tok: Tok::Ident(name.to_string()),
                    pos: start,
                });
                i += close + 2;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while bytes
                    .get(j)
                    .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
                {
                    j += 1;
                }
                let word = &src[i..j];
                let tok = match Keyword::lookup(word) {
                    Some(k) => Tok::Kw(k),
                    None => Tok::Ident(word.to_string()),
                };
                out.push(Token { tok, pos: start });
                i = j;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(SyntaxError::new(
                    start,
                    "a token",
                    alloc::format!("character `{ch}`"),
                ));
            }
        }
    }
    Ok(out)
}
