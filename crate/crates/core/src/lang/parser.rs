//! Recursive-descent parser for `.lam` programs.
//!
//! The surface syntax admits a little sugar on top of let normal form:
//! nested node constructions, compound `match` scrutinees and compound `if`
//! conditions are lifted into fresh `let` bindings named `$k`, and the test
//! `x = leaf` in an `if` condition becomes a `match` on `x`. Arguments of
//! applications and operands of comparisons must already be variables.

use std::collections::BTreeSet;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::value::Value;
use super::ParseError;

#[derive(Debug, Clone)]
enum Surface {
    Bool(bool),
    Ident(String, Pos),
    Leaf,
    Cmp(Box<Surface>, CmpOp, Box<Surface>, Pos),
    If(Box<Surface>, Box<Surface>, Box<Surface>),
    Let(String, Box<Surface>, Box<Surface>),
    App(String, Vec<Surface>, Pos),
    Node(Box<Surface>, Box<Surface>, Box<Surface>, Pos),
    Match(Box<Surface>, Option<Box<Surface>>, Option<SurfaceArm>),
}

#[derive(Debug, Clone)]
struct SurfaceArm {
    left: String,
    label: String,
    right: String,
    body: Box<Surface>,
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    /// Index of the first token of the definition being parsed.
    def_start: usize,
    eof: Pos,
    depth: usize,
}

/// Maximum syntactic nesting accepted by the parsers.
pub const MAX_DEPTH: usize = 128;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.i).map(|t| t.pos).unwrap_or(self.eof)
    }

    /// A token in column 1 opens the next top-level item.
    fn at_item_boundary(&self) -> bool {
        match self.toks.get(self.i) {
            None => true,
            Some(t) => self.i != self.def_start && t.pos.col == 1,
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|t| t.tok.clone());
        self.i += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if !self.at_item_boundary() && self.peek() == Some(&want) {
            self.i += 1;
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        match self.toks.get(self.i) {
            Some(t) => ParseError::syntax(t.pos, format!("expected {what}, found {:?}", t.tok)),
            None => ParseError::syntax(self.eof, format!("expected {what}, found end of input")),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        if self.at_item_boundary() {
            return Err(self.unexpected(what));
        }
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.i += 1;
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn expr(&mut self) -> Result<Surface, ParseError> {
        if self.depth >= MAX_DEPTH {
            return Err(ParseError::syntax(self.pos(), "expression nested too deeply"));
        }
        self.depth += 1;
        let e = self.expr_inner();
        self.depth -= 1;
        e
    }

    fn expr_inner(&mut self) -> Result<Surface, ParseError> {
        if self.at_item_boundary() {
            return Err(self.unexpected("an expression"));
        }
        match self.peek() {
            Some(Tok::Let) => {
                self.i += 1;
                let x = self.ident("a variable")?;
                self.expect(Tok::Eq, "`=`")?;
                let e1 = self.expr()?;
                self.expect(Tok::In, "`in`")?;
                let e2 = self.expr()?;
                Ok(Surface::Let(x, Box::new(e1), Box::new(e2)))
            }
            Some(Tok::If) => {
                self.i += 1;
                let c = self.expr()?;
                self.expect(Tok::Then, "`then`")?;
                let t = self.expr()?;
                self.expect(Tok::Else, "`else`")?;
                let e = self.expr()?;
                Ok(Surface::If(Box::new(c), Box::new(t), Box::new(e)))
            }
            Some(Tok::Match) => {
                self.i += 1;
                let scrut = self.expr()?;
                self.expect(Tok::With, "`with`")?;
                self.arms(scrut)
            }
            _ => self.cmp_expr(),
        }
    }

    fn arms(&mut self, scrut: Surface) -> Result<Surface, ParseError> {
        let mut leaf = None;
        let mut node: Option<SurfaceArm> = None;
        while !self.at_item_boundary() && self.peek() == Some(&Tok::Bar) {
            let bar_pos = self.pos();
            self.i += 1;
            match self.peek() {
                Some(Tok::Leaf) => {
                    self.i += 1;
                    self.expect(Tok::Arrow, "`->`")?;
                    if leaf.is_some() {
                        return Err(ParseError::syntax(bar_pos, "duplicate leaf arm"));
                    }
                    leaf = Some(Box::new(self.expr()?));
                }
                Some(Tok::NodeKw) => {
                    self.i += 1;
                    let l = self.pattern_var()?;
                    let a = self.pattern_var()?;
                    let r = self.pattern_var()?;
                    self.expect(Tok::Arrow, "`->`")?;
                    if node.is_some() {
                        return Err(ParseError::syntax(bar_pos, "duplicate node arm"));
                    }
                    let body = Box::new(self.expr()?);
                    node = Some(SurfaceArm { left: l, label: a, right: r, body });
                }
                Some(Tok::LParen) => {
                    self.i += 1;
                    let l = self.pattern_var()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let a = self.pattern_var()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let r = self.pattern_var()?;
                    self.expect(Tok::RParen, "`)`")?;
                    self.expect(Tok::Arrow, "`->`")?;
                    if node.is_some() {
                        return Err(ParseError::syntax(bar_pos, "duplicate node arm"));
                    }
                    let body = Box::new(self.expr()?);
                    node = Some(SurfaceArm { left: l, label: a, right: r, body });
                }
                _ => return Err(self.unexpected("a `leaf` or `node` pattern")),
            }
        }
        if leaf.is_none() && node.is_none() {
            return Err(self.unexpected("a match arm"));
        }
        Ok(Surface::Match(Box::new(scrut), leaf, node))
    }

    fn pattern_var(&mut self) -> Result<String, ParseError> {
        self.ident("a pattern variable")
    }

    fn cmp_expr(&mut self) -> Result<Surface, ParseError> {
        let lhs = self.app_expr()?;
        if self.at_item_boundary() {
            return Ok(lhs);
        }
        let op = match self.peek() {
            Some(Tok::Lt) => CmpOp::Lt,
            Some(Tok::Gt) => CmpOp::Gt,
            Some(Tok::Eq) => CmpOp::Eq,
            _ => return Ok(lhs),
        };
        let pos = self.pos();
        self.i += 1;
        let rhs = self.app_expr()?;
        Ok(Surface::Cmp(Box::new(lhs), op, Box::new(rhs), pos))
    }

    fn starts_atom(&self) -> bool {
        !self.at_item_boundary()
            && matches!(
                self.peek(),
                Some(Tok::Ident(_) | Tok::Leaf | Tok::True | Tok::False | Tok::LParen)
            )
    }

    fn app_expr(&mut self) -> Result<Surface, ParseError> {
        if self.at_item_boundary() {
            return Err(self.unexpected("an expression"));
        }
        if let Some(Tok::Ident(f)) = self.peek() {
            let f = f.clone();
            let pos = self.pos();
            self.i += 1;
            let mut args = Vec::new();
            while self.starts_atom() {
                args.push(self.atom()?);
            }
            if args.is_empty() {
                return Ok(Surface::Ident(f, pos));
            }
            return Ok(Surface::App(f, args, pos));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Surface, ParseError> {
        if self.at_item_boundary() {
            return Err(self.unexpected("an expression"));
        }
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Ident(s)) => Ok(Surface::Ident(s, pos)),
            Some(Tok::Leaf) => Ok(Surface::Leaf),
            Some(Tok::True) => Ok(Surface::Bool(true)),
            Some(Tok::False) => Ok(Surface::Bool(false)),
            Some(Tok::LParen) => {
                let first = self.expr()?;
                if !self.at_item_boundary() && self.peek() == Some(&Tok::Comma) {
                    self.i += 1;
                    let label = self.expr()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let right = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Surface::Node(Box::new(first), Box::new(label), Box::new(right), pos))
                } else {
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(first)
                }
            }
            _ => {
                self.i -= 1;
                Err(self.unexpected("an expression"))
            }
        }
    }

    fn simple_type(&mut self) -> Result<SimpleType, ParseError> {
        let pos = self.pos();
        match self.ident("a type")?.as_str() {
            "B" | "Base" => Ok(SimpleType::Base),
            "T" | "Tree" => Ok(SimpleType::Tree),
            "Bool" => Ok(SimpleType::Bool),
            other => Err(ParseError::syntax(pos, format!("unknown type `{other}`"))),
        }
    }

    fn fun_type(&mut self) -> Result<FunType, ParseError> {
        let mut params = vec![];
        if let Some(Tok::Ident(s)) = self.peek() {
            if s == "Unit" {
                self.i += 1;
            } else {
                params.push(self.simple_type()?);
            }
        }
        while !self.at_item_boundary() && self.peek() == Some(&Tok::Star) {
            self.i += 1;
            params.push(self.simple_type()?);
        }
        self.expect(Tok::Arrow, "`->`")?;
        let result = self.simple_type()?;
        Ok(FunType { params, result })
    }
}

struct Desugar<'a> {
    functions: &'a BTreeSet<String>,
    next_fresh: usize,
}

impl Desugar<'_> {
    fn fresh(&mut self) -> String {
        let v = format!("${}", self.next_fresh);
        self.next_fresh += 1;
        v
    }

    fn is_fun(&self, name: &str, bound: &[String]) -> bool {
        self.functions.contains(name) && !bound.iter().any(|b| b == name)
    }

    /// The surface term must denote a variable.
    fn variable(&self, s: &Surface, bound: &[String], what: &str) -> Result<String, ParseError> {
        match s {
            Surface::Ident(x, pos) if self.is_fun(x, bound) => Err(ParseError::not_lnf(
                *pos,
                format!("{what} is a function call, not a variable"),
            )),
            Surface::Ident(x, _) => Ok(x.clone()),
            other => Err(ParseError::not_lnf(
                surface_pos(other),
                format!("{what} is not a variable"),
            )),
        }
    }

    fn expr(&mut self, s: &Surface, bound: &mut Vec<String>) -> Result<Expr, ParseError> {
        Ok(match s {
            Surface::Bool(b) => Expr::Bool(*b),
            Surface::Leaf => Expr::Leaf,
            Surface::Ident(x, _) => {
                if self.is_fun(x, bound) {
                    Expr::App(x.clone(), vec![])
                } else {
                    Expr::Var(x.clone())
                }
            }
            Surface::Cmp(l, op, r, pos) => {
                if matches!(**l, Surface::Leaf) || matches!(**r, Surface::Leaf) {
                    return Err(ParseError::not_lnf(
                        *pos,
                        "a tree test `x = leaf` is only allowed as an `if` condition",
                    ));
                }
                let x = self.variable(l, bound, "comparison operand")?;
                let y = self.variable(r, bound, "comparison operand")?;
                Expr::Cmp(*op, x, y)
            }
            Surface::If(c, t, e) => {
                if let Some(x) = self.leaf_test(c, bound)? {
                    let then = self.expr(t, bound)?;
                    let (l, a, r) = (self.fresh(), self.fresh(), self.fresh());
                    let els = self.expr(e, bound)?;
                    return Ok(Expr::Match {
                        scrutinee: x,
                        leaf: Box::new(then),
                        node: NodeArm { left: l, label: a, right: r, body: Box::new(els) },
                        arms: MatchArms::Both,
                    });
                }
                let t = self.expr(t, bound)?;
                let e = self.expr(e, bound)?;
                match &**c {
                    Surface::Ident(x, _) if !self.is_fun(x, bound) => {
                        Expr::If(x.clone(), Box::new(t), Box::new(e))
                    }
                    other => {
                        let cond = self.expr(other, bound)?;
                        let v = self.fresh();
                        Expr::let_in(v.clone(), cond, Expr::If(v, Box::new(t), Box::new(e)))
                    }
                }
            }
            Surface::Let(x, e1, e2) => {
                let e1 = self.expr(e1, bound)?;
                bound.push(x.clone());
                let e2 = self.expr(e2, bound);
                bound.pop();
                Expr::Let(x.clone(), Box::new(e1), Box::new(e2?))
            }
            Surface::App(f, args, pos) => {
                if bound.iter().any(|b| b == f) {
                    return Err(ParseError::syntax(*pos, format!("variable `{f}` applied as a function")));
                }
                let args = args
                    .iter()
                    .map(|a| self.variable(a, bound, "application argument"))
                    .collect::<Result<Vec<_>, _>>()?;
                Expr::App(f.clone(), args)
            }
            Surface::Node(l, a, r, _) => {
                let mut lifted = Vec::new();
                let l = self.component(l, bound, &mut lifted)?;
                let a = self.variable(a, bound, "node label")?;
                let r = self.component(r, bound, &mut lifted)?;
                let mut out = Expr::Node(l, a, r);
                for (v, e) in lifted.into_iter().rev() {
                    out = Expr::let_in(v, e, out);
                }
                out
            }
            Surface::Match(scrut, leaf, node) => {
                let (x, wrap) = match &**scrut {
                    Surface::Ident(x, _) if !self.is_fun(x, bound) => (x.clone(), None),
                    other => {
                        let e = self.expr(other, bound)?;
                        (self.fresh(), Some(e))
                    }
                };
                let arms = match (leaf, node) {
                    (Some(_), Some(_)) => MatchArms::Both,
                    (Some(_), None) => MatchArms::LeafOnly,
                    _ => MatchArms::NodeOnly,
                };
                let leaf_e = match leaf {
                    Some(e) => self.expr(e, bound)?,
                    None => Expr::Leaf,
                };
                let node_arm = match node {
                    Some(arm) => {
                        let depth = bound.len();
                        let left = self.binder(&arm.left);
                        let label = self.binder(&arm.label);
                        let right = self.binder(&arm.right);
                        bound.extend([left.clone(), label.clone(), right.clone()]);
                        let body = self.expr(&arm.body, bound);
                        bound.truncate(depth);
                        NodeArm { left, label, right, body: Box::new(body?) }
                    }
                    None => NodeArm {
                        left: "_l".into(),
                        label: "_a".into(),
                        right: "_r".into(),
                        body: Box::new(Expr::Leaf),
                    },
                };
                let m = Expr::Match { scrutinee: x.clone(), leaf: Box::new(leaf_e), node: node_arm, arms };
                match wrap {
                    Some(e) => Expr::let_in(x, e, m),
                    None => m,
                }
            }
        })
    }

    fn binder(&mut self, name: &str) -> String {
        if name == "_" {
            self.fresh()
        } else {
            name.to_string()
        }
    }

    fn leaf_test(&self, c: &Surface, bound: &[String]) -> Result<Option<String>, ParseError> {
        if let Surface::Cmp(l, CmpOp::Eq, r, _) = c {
            let other = match (&**l, &**r) {
                (Surface::Leaf, x) | (x, Surface::Leaf) => x,
                _ => return Ok(None),
            };
            return self.variable(other, bound, "tree test operand").map(Some);
        }
        Ok(None)
    }

    fn component(
        &mut self,
        s: &Surface,
        bound: &mut Vec<String>,
        lifted: &mut Vec<(String, Expr)>,
    ) -> Result<String, ParseError> {
        match s {
            Surface::Leaf | Surface::Node(..) => {
                let e = self.expr(s, bound)?;
                let v = self.fresh();
                lifted.push((v.clone(), e));
                Ok(v)
            }
            other => self.variable(other, bound, "node component"),
        }
    }
}

fn surface_pos(s: &Surface) -> Pos {
    match s {
        Surface::Ident(_, p) | Surface::App(_, _, p) | Surface::Node(_, _, _, p) => *p,
        Surface::Cmp(_, _, _, p) => *p,
        Surface::Let(_, e, _) | Surface::If(e, _, _) | Surface::Match(e, _, _) => surface_pos(e),
        _ => Pos::default(),
    }
}

fn max_fresh_index(toks: &[Token]) -> usize {
    toks.iter()
        .filter_map(|t| match &t.tok {
            Tok::Ident(s) => s.strip_prefix('$').and_then(|n| n.parse::<usize>().ok()),
            _ => None,
        })
        .max()
        .map_or(1, |n| n + 1)
}

struct RawDef {
    name: String,
    params: Vec<String>,
    body: Surface,
    pos: Pos,
}

/// Parse a `.lam` program.
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let toks = tokenize(src)?;
    let eof = Pos { line: src.lines().count() + 1, col: 1 };
    let mut p = Parser { toks, i: 0, def_start: 0, eof, depth: 0 };
    let mut raw = Vec::new();
    let mut decls: Vec<(String, FunType, Pos)> = Vec::new();
    while p.i < p.toks.len() {
        p.def_start = p.i;
        let pos = p.pos();
        if p.toks[p.i].pos.col != 1 {
            return Err(ParseError::syntax(pos, "top-level items must start in column 1"));
        }
        let name = p.ident("a function name")?;
        if p.peek() == Some(&Tok::Colon) && !p.at_item_boundary() {
            p.i += 1;
            let ty = p.fun_type()?;
            decls.push((name, ty, pos));
            continue;
        }
        let mut params = Vec::new();
        while !p.at_item_boundary() {
            if let Some(Tok::Ident(_)) = p.peek() {
                params.push(p.ident("a parameter")?);
            } else {
                break;
            }
        }
        p.expect(Tok::Eq, "`=`")?;
        let body = p.expr()?;
        if !p.at_item_boundary() {
            return Err(p.unexpected("end of definition"));
        }
        raw.push(RawDef { name, params, body, pos });
    }

    let functions: BTreeSet<String> = raw.iter().map(|d| d.name.clone()).collect();
    if functions.len() != raw.len() {
        let mut seen = BTreeSet::new();
        for d in &raw {
            if !seen.insert(d.name.clone()) {
                return Err(ParseError::syntax(d.pos, format!("`{}` is defined twice", d.name)));
            }
        }
    }
    let mut ds = Desugar { functions: &functions, next_fresh: max_fresh_index(&p.toks) };
    let mut defs = Vec::new();
    for d in raw {
        let mut bound = d.params.clone();
        let body = ds.expr(&d.body, &mut bound)?;
        defs.push(FunDef { name: d.name, params: d.params, body, ty: None, pos: d.pos });
    }
    for (name, ty, pos) in decls {
        match defs.iter_mut().find(|d| d.name == name) {
            Some(d) if d.ty.is_none() => d.ty = Some(ty),
            Some(_) => return Err(ParseError::syntax(pos, format!("duplicate type for `{name}`"))),
            None => return Err(ParseError::syntax(pos, format!("type given for undefined `{name}`"))),
        }
    }
    Ok(Program { defs })
}

/// Parse a value literal: `true`, `false`, an integer, `nil`/`leaf`, or `(l, a, r)`.
pub fn parse_value(src: &str) -> Result<Value, ParseError> {
    let toks = tokenize(src)?;
    let mut i = 0;
    let v = value_at(&toks, &mut i, 0)?;
    if let Some(t) = toks.get(i) {
        return Err(ParseError::syntax(t.pos, "trailing input after value"));
    }
    Ok(v)
}

fn value_at(toks: &[Token], i: &mut usize, depth: usize) -> Result<Value, ParseError> {
    let Some(t) = toks.get(*i) else {
        return Err(ParseError::syntax(Pos::default(), "expected a value"));
    };
    *i += 1;
    match &t.tok {
        Tok::True => Ok(Value::Bool(true)),
        Tok::False => Ok(Value::Bool(false)),
        Tok::Leaf => Ok(Value::Leaf),
        Tok::Int(n) => Ok(Value::Base(n.clone())),
        Tok::Minus => match toks.get(*i).map(|t| &t.tok) {
            Some(Tok::Int(n)) => {
                *i += 1;
                Ok(Value::Base(-n.clone()))
            }
            _ => Err(ParseError::syntax(t.pos, "expected an integer after `-`")),
        },
        Tok::LParen => {
            if depth >= MAX_DEPTH {
                return Err(ParseError::syntax(t.pos, "value nested too deeply"));
            }
            let l = value_at(toks, i, depth + 1)?;
            comma(toks, i)?;
            let a = value_at(toks, i, depth + 1)?;
            comma(toks, i)?;
            let r = value_at(toks, i, depth + 1)?;
            match toks.get(*i).map(|t| &t.tok) {
                Some(Tok::RParen) => *i += 1,
                _ => return Err(ParseError::syntax(t.pos, "unclosed node literal")),
            }
            match (l.is_tree(), a, r.is_tree()) {
                (true, Value::Base(a), true) => Ok(Value::node(l, a, r)),
                _ => Err(ParseError::syntax(t.pos, "node literal must be (tree, integer, tree)")),
            }
        }
        _ => Err(ParseError::syntax(t.pos, format!("unexpected {:?} in value", t.tok))),
    }
}

fn comma(toks: &[Token], i: &mut usize) -> Result<(), ParseError> {
    match toks.get(*i) {
        Some(t) if t.tok == Tok::Comma => {
            *i += 1;
            Ok(())
        }
        Some(t) => Err(ParseError::syntax(t.pos, "expected `,`")),
        None => Err(ParseError::syntax(Pos::default(), "expected `,`")),
    }
}
