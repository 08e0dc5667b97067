//! Tokenizer for the `.rms` surface syntax.

use std::fmt;

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Bang,
    Question,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LAngle,
    RAngle,
    Semi,
    Colon,
    Comma,
    Dot,
    Arrow,
    MapsTo,
    ParPar,
    AndAnd,
    EqEq,
    Assign,
    Plus,
    Minus,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Str(_) => f.write_str("string literal"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Question => f.write_str("`?`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LAngle => f.write_str("`<`"),
            Tok::RAngle => f.write_str("`>`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::MapsTo => f.write_str("`|>`"),
            Tok::ParPar => f.write_str("`||`"),
            Tok::AndAnd => f.write_str("`&&`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::Assign => f.write_str("`=`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

pub fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    loop {
        let pos = Pos { line, col };
        let c = match chars.peek().copied() {
            None => break,
            Some(c) => c,
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '/' => {
                bump!();
                if chars.peek() == Some(&'/') {
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        bump!();
                    }
                } else {
                    return Err(ParseError::new(pos, "unexpected `/` (comments are `//`)"));
                }
            }
            '{' => {
                bump!();
                toks.push((Tok::LBrace, pos));
            }
            '}' => {
                bump!();
                toks.push((Tok::RBrace, pos));
            }
            '(' => {
                bump!();
                toks.push((Tok::LParen, pos));
            }
            ')' => {
                bump!();
                toks.push((Tok::RParen, pos));
            }
            '[' => {
                bump!();
                toks.push((Tok::LBracket, pos));
            }
            ']' => {
                bump!();
                toks.push((Tok::RBracket, pos));
            }
            '<' => {
                bump!();
                toks.push((Tok::LAngle, pos));
            }
            '>' => {
                bump!();
                toks.push((Tok::RAngle, pos));
            }
            ';' => {
                bump!();
                toks.push((Tok::Semi, pos));
            }
            ':' => {
                bump!();
                toks.push((Tok::Colon, pos));
            }
            ',' => {
                bump!();
                toks.push((Tok::Comma, pos));
            }
            '.' => {
                bump!();
                toks.push((Tok::Dot, pos));
            }
            '!' => {
                bump!();
                toks.push((Tok::Bang, pos));
            }
            '?' => {
                bump!();
                toks.push((Tok::Question, pos));
            }
            '+' => {
                bump!();
                toks.push((Tok::Plus, pos));
            }
            '-' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    toks.push((Tok::Arrow, pos));
                } else {
                    toks.push((Tok::Minus, pos));
                }
            }
            '|' => {
                bump!();
                match chars.peek() {
                    Some('>') => {
                        bump!();
                        toks.push((Tok::MapsTo, pos));
                    }
                    Some('|') => {
                        bump!();
                        toks.push((Tok::ParPar, pos));
                    }
                    _ => return Err(ParseError::new(pos, "expected `|>` or `||`")),
                }
            }
            '&' => {
                bump!();
                if chars.peek() == Some(&'&') {
                    bump!();
                    toks.push((Tok::AndAnd, pos));
                } else {
                    return Err(ParseError::new(pos, "expected `&&`"));
                }
            }
            '=' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    toks.push((Tok::EqEq, pos));
                } else {
                    toks.push((Tok::Assign, pos));
                }
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        None => return Err(ParseError::new(pos, "unterminated string literal")),
                        Some('"') => break,
                        Some('\\') => match bump!() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            other => {
                                return Err(ParseError::new(
                                    pos,
                                    format!("unknown escape `\\{}`", other.map_or(String::new(), |c| c.to_string())),
                                ))
                            }
                        },
                        Some('\n') => {
                            return Err(ParseError::new(pos, "unterminated string literal"))
                        }
                        Some(c) => s.push(c),
                    }
                }
                toks.push((Tok::Str(s), pos));
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                let n: i64 = s
                    .parse()
                    .map_err(|_| ParseError::new(pos, format!("integer literal `{s}` out of range")))?;
                toks.push((Tok::Int(n), pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Ident(s), pos));
            }
            c => return Err(ParseError::new(pos, format!("unexpected character `{c}`"))),
        }
    }
    toks.push((Tok::Eof, Pos { line, col }));
    Ok(toks)
}
