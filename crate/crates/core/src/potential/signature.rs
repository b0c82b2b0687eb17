//! Annotated signatures and the `.sig` file format.

use std::fmt::Write;

use super::text::{annotation, AnnotationParseError, Cursor};
use super::Annotation;
use crate::lang::{FunType, SimpleType};

/// A function type with the annotation pairs `(Q, Q')` it is claimed (or
/// inferred) to satisfy, for costed and cost-free evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSignature {
    pub name: String,
    pub ty: FunType,
    pub costed: Vec<(Annotation, Annotation)>,
    pub cost_free: Vec<(Annotation, Annotation)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("signature syntax: {0}")]
    Syntax(#[from] AnnotationParseError),
    #[error("signature of `{name}`: {message}")]
    Shape { name: String, message: String },
}

impl AnnotatedSignature {
    pub fn new(name: impl Into<String>, ty: FunType) -> Self {
        AnnotatedSignature { name: name.into(), ty, costed: Vec::new(), cost_free: Vec::new() }
    }

    pub fn arg_trees(&self) -> usize {
        self.ty.params.iter().filter(|t| t.is_tree()).count()
    }

    pub fn result_trees(&self) -> usize {
        self.ty.result.tree_count()
    }

    /// Check that every annotation has the arity its position requires.
    pub fn validate(&self) -> Result<(), SignatureError> {
        let (m, k) = (self.arg_trees(), self.result_trees());
        for (q, q1) in self.costed.iter().chain(&self.cost_free) {
            if q.arity() != m || q1.arity() != k {
                return Err(SignatureError::Shape {
                    name: self.name.clone(),
                    message: format!(
                        "pair has arities ({}, {}), type `{}` needs ({m}, {k})",
                        q.arity(),
                        q1.arity(),
                        self.ty
                    ),
                });
            }
            if !q.is_nonnegative() || !q1.is_nonnegative() {
                return Err(SignatureError::Shape {
                    name: self.name.clone(),
                    message: "coefficients must be nonnegative".into(),
                });
            }
        }
        Ok(())
    }
}

fn simple(c: &mut Cursor) -> Result<SimpleType, AnnotationParseError> {
    match c.ident() {
        "B" => Ok(SimpleType::Base),
        "T" => Ok(SimpleType::Tree),
        "Bool" => Ok(SimpleType::Bool),
        other => c.err(format!("unknown type `{other}`")),
    }
}

fn fun_type(c: &mut Cursor) -> Result<FunType, AnnotationParseError> {
    let mut params = Vec::new();
    let save = c.pos;
    if c.ident() != "Unit" {
        c.pos = save;
        loop {
            params.push(simple(c)?);
            if !c.eat("*") {
                break;
            }
        }
    }
    c.expect("->")?;
    let result = simple(c)?;
    Ok(FunType { params, result })
}

fn braced(c: &mut Cursor) -> Result<Annotation, AnnotationParseError> {
    c.expect("{")?;
    let q = annotation(c)?;
    c.expect("}")?;
    Ok(q)
}

fn skip_comments(c: &mut Cursor) {
    loop {
        c.ws();
        if c.rest().starts_with("--") {
            let n = c.rest().find('\n').unwrap_or(c.rest().len());
            c.pos += n;
        } else {
            return;
        }
    }
}

/// Parse a `.sig` file: a sequence of
/// `fn f : A1 * .. * An -> A | costed {Q} -> {Q'} | costfree {P} -> {P'} ...`.
pub fn parse_signatures(src: &str) -> Result<Vec<AnnotatedSignature>, SignatureError> {
    let mut c = Cursor::new(src);
    let mut out: Vec<AnnotatedSignature> = Vec::new();
    loop {
        skip_comments(&mut c);
        if c.at_end() {
            break;
        }
        c.expect("fn")?;
        let name = c.ident().to_string();
        if name.is_empty() {
            return Err(c.err::<()>("expected a function name").unwrap_err().into());
        }
        c.expect(":")?;
        let ty = fun_type(&mut c)?;
        let mut sig = AnnotatedSignature::new(name, ty);
        loop {
            skip_comments(&mut c);
            if !c.eat("|") {
                break;
            }
            let kind = c.ident();
            let q = braced(&mut c)?;
            c.expect("->")?;
            let q1 = braced(&mut c)?;
            match kind {
                "costed" => sig.costed.push((q, q1)),
                "costfree" => sig.cost_free.push((q, q1)),
                k => return Err(c.err::<()>(format!("expected `costed` or `costfree`, found `{k}`")).unwrap_err().into()),
            }
        }
        sig.validate()?;
        if out.iter().any(|s| s.name == sig.name) {
            return Err(SignatureError::Shape { name: sig.name, message: "declared twice".into() });
        }
        out.push(sig);
    }
    Ok(out)
}

pub fn print_signatures(sigs: &[AnnotatedSignature]) -> String {
    let mut out = String::new();
    for s in sigs {
        write!(out, "fn {} : {}", s.name, s.ty).unwrap();
        for (kind, pairs) in [("costed", &s.costed), ("costfree", &s.cost_free)] {
            for (q, q1) in pairs {
                write!(out, "\n  | {kind} {{ {q} }}\n    -> {{ {q1} }}").unwrap();
            }
        }
        out.push('\n');
    }
    out
}
