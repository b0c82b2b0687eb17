//! Annotation text: `rank: [q1, ...]; log: {(a1,...,am|b): q, ...}`.

use std::str::FromStr;

use num_traits::Zero;

use super::{Annotation, LogIndex, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("at offset {offset}: {message}")]
pub struct AnnotationParseError {
    pub offset: usize,
    pub message: String,
}

pub(crate) struct Cursor<'a> {
    pub src: &'a str,
    pub pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    pub fn err<T>(&self, message: impl Into<String>) -> Result<T, AnnotationParseError> {
        Err(AnnotationParseError { offset: self.pos, message: message.into() })
    }

    pub fn ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    pub fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub fn at_end(&mut self) -> bool {
        self.ws();
        self.pos == self.src.len()
    }

    pub fn eat(&mut self, s: &str) -> bool {
        self.ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, s: &str) -> Result<(), AnnotationParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn token(&mut self, ok: impl Fn(char) -> bool) -> &'a str {
        self.ws();
        let rest = self.rest();
        let n = rest.find(|c: char| !ok(c)).unwrap_or(rest.len());
        self.pos += n;
        &rest[..n]
    }

    pub fn natural(&mut self) -> Result<u32, AnnotationParseError> {
        let t = self.token(|c| c.is_ascii_digit());
        match t.parse() {
            Ok(n) => Ok(n),
            Err(_) => self.err("expected a natural number"),
        }
    }

    pub fn rational(&mut self) -> Result<Rat, AnnotationParseError> {
        let t = self.token(|c| c.is_ascii_digit() || c == '/');
        if t.is_empty() || t.len() > 200 {
            return self.err("expected a nonnegative rational `p` or `p/q`");
        }
        match Rat::from_str(t) {
            Ok(q) => Ok(q),
            Err(_) => self.err(format!("bad rational `{t}`")),
        }
    }

    pub fn ident(&mut self) -> &'a str {
        self.token(|c| c.is_alphanumeric() || c == '_' || c == '$' || c == '\'')
    }
}

pub(crate) fn annotation(c: &mut Cursor) -> Result<Annotation, AnnotationParseError> {
    c.expect("rank")?;
    c.expect(":")?;
    c.expect("[")?;
    let mut rank = Vec::new();
    if !c.eat("]") {
        loop {
            rank.push(c.rational()?);
            if c.eat("]") {
                break;
            }
            c.expect(",")?;
        }
    }
    let mut q = Annotation::zero(rank.len());
    q.rank = rank;
    if !c.eat(";") {
        return Ok(q);
    }
    c.expect("log")?;
    c.expect(":")?;
    c.expect("{")?;
    if c.eat("}") {
        return Ok(q);
    }
    loop {
        c.expect("(")?;
        let mut a = Vec::new();
        if !c.eat("|") {
            loop {
                a.push(c.natural()?);
                if c.eat("|") {
                    break;
                }
                c.expect(",")?;
            }
        }
        let b = c.natural()?;
        c.expect(")")?;
        if a.len() != q.arity() {
            return c.err(format!("index of length {} in an annotation of arity {}", a.len(), q.arity()));
        }
        c.expect(":")?;
        let v = c.rational()?;
        let idx = LogIndex::new(a, b);
        if !q.log_coeff(&idx).is_zero() {
            return c.err(format!("duplicate index {idx}"));
        }
        q.set_log(idx, v);
        if c.eat("}") {
            break;
        }
        c.expect(",")?;
    }
    Ok(q)
}

pub fn parse_annotation(src: &str) -> Result<Annotation, AnnotationParseError> {
    let mut c = Cursor::new(src);
    let q = annotation(&mut c)?;
    if !c.at_end() {
        return c.err("trailing input");
    }
    Ok(q)
}
