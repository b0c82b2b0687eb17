use num_bigint::BigInt;

use super::ast::Pos;
use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Match,
    With,
    Let,
    In,
    If,
    Then,
    Else,
    Leaf,
    NodeKw,
    True,
    False,
    Eq,
    Lt,
    Gt,
    LParen,
    RParen,
    Comma,
    Bar,
    Arrow,
    Colon,
    Star,
    Minus,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "match" => Tok::Match,
        "with" => Tok::With,
        "let" => Tok::Let,
        "in" => Tok::In,
        "if" => Tok::If,
        "then" => Tok::Then,
        "else" => Tok::Else,
        "leaf" | "nil" => Tok::Leaf,
        "node" => Tok::NodeKw,
        "true" => Tok::True,
        "false" => Tok::False,
        _ => return None,
    })
}

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
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
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if ident_start(c) {
            i += 1;
            while i < chars.len() && ident_continue(chars[i]) {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            if s == "$" {
                return Err(ParseError::syntax(pos, "`$` must be followed by a name"));
            }
            keyword(&s).unwrap_or(Tok::Ident(s))
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            Tok::Int(s.parse().expect("digits"))
        } else {
            let two = chars.get(i + 1).copied();
            let (t, len) = match (c, two) {
                ('-', Some('>')) => (Tok::Arrow, 2),
                ('=', Some('=')) => (Tok::Eq, 2),
                ('=', _) => (Tok::Eq, 1),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                (',', _) => (Tok::Comma, 1),
                ('|', _) => (Tok::Bar, 1),
                (':', _) => (Tok::Colon, 1),
                ('*', _) => (Tok::Star, 1),
                ('×', _) => (Tok::Star, 1),
                ('-', _) => (Tok::Minus, 1),
                _ => {
                    return Err(ParseError::syntax(
                        pos,
                        format!("unexpected character {c:?}"),
                    ))
                }
            };
            i += len;
            t
        };
        col += i - start;
        out.push(Token { tok, pos });
    }
    Ok(out)
}
