//! The first-order tree language: AST, concrete syntax and values.

mod ast;
mod check;
mod lexer;
mod parser;
mod pretty;
mod value;

pub use ast::*;
pub use check::{infer_types, is_well_formed, well_formed, Diagnostic, DiagnosticKind};
pub use parser::{parse, parse_value, MAX_DEPTH};
pub use pretty::{expr_to_string, print_program};
pub use value::{size, NotATree, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    /// The construct is syntactically valid but not in let normal form and
    /// is not covered by the desugaring.
    NotLetNormalForm,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub(crate) fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        ParseError { kind: ParseErrorKind::Syntax, pos, message: message.into() }
    }

    pub(crate) fn not_lnf(pos: Pos, message: impl Into<String>) -> Self {
        ParseError { kind: ParseErrorKind::NotLetNormalForm, pos, message: message.into() }
    }
}

/// Parse and type a program in one step.
pub fn load(src: &str) -> Result<Program, LoadError> {
    let mut p = parse(src)?;
    infer_types(&mut p).map_err(LoadError::Ill)?;
    Ok(p)
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum LoadError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("ill-formed program: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Ill(Vec<Diagnostic>),
}
