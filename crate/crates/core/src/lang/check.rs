//! First-order simple typing: unification-based inference of function types
//! plus scope and exhaustiveness diagnostics.

use std::collections::HashMap;
use std::fmt;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    UnboundVariable,
    UndefinedFunction,
    ArityMismatch,
    ArgumentTypeMismatch,
    TypeMismatch,
    DuplicateParameter,
    PartialMatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub function: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "in `{}`: {}", self.function, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Var(usize),
    Bool,
    Base,
    Tree,
}

struct Unifier {
    parent: Vec<Option<Ty>>,
}

impl Unifier {
    fn fresh(&mut self) -> Ty {
        self.parent.push(None);
        Ty::Var(self.parent.len() - 1)
    }

    fn resolve(&self, t: Ty) -> Ty {
        let mut t = t;
        while let Ty::Var(v) = t {
            match self.parent[v] {
                Some(next) => t = next,
                None => return t,
            }
        }
        t
    }

    fn unify(&mut self, a: Ty, b: Ty) -> bool {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (a, b) {
            _ if a == b => true,
            (Ty::Var(v), other) | (other, Ty::Var(v)) => {
                self.parent[v] = Some(other);
                true
            }
            _ => false,
        }
    }

    fn concrete(&self, t: Ty) -> SimpleType {
        match self.resolve(t) {
            Ty::Bool => SimpleType::Bool,
            Ty::Base => SimpleType::Base,
            // Unconstrained positions default to trees.
            Ty::Tree | Ty::Var(_) => SimpleType::Tree,
        }
    }
}

fn of_simple(t: &SimpleType) -> Ty {
    match t {
        SimpleType::Bool => Ty::Bool,
        SimpleType::Base => Ty::Base,
        _ => Ty::Tree,
    }
}

fn show(t: Ty) -> &'static str {
    match t {
        Ty::Bool => "Bool",
        Ty::Base => "B",
        Ty::Tree => "T",
        Ty::Var(_) => "?",
    }
}

struct Checker<'p> {
    program: &'p Program,
    u: Unifier,
    sigs: HashMap<String, (Vec<Ty>, Ty)>,
    diags: Vec<Diagnostic>,
    current: String,
    /// Operand types of `=`, checked once all constraints are known.
    equalities: Vec<(Ty, String, String)>,
}

impl Checker<'_> {
    fn diag(&mut self, kind: DiagnosticKind, message: String) {
        self.diags.push(Diagnostic { kind, function: self.current.clone(), message });
    }

    fn expect(&mut self, got: Ty, want: Ty, what: &str) {
        if !self.u.unify(got, want) {
            let (g, w) = (self.u.resolve(got), self.u.resolve(want));
            self.diag(
                DiagnosticKind::TypeMismatch,
                format!("{what}: expected {}, found {}", show(w), show(g)),
            );
        }
    }

    fn lookup(&mut self, env: &[(String, Ty)], x: &str) -> Ty {
        match env.iter().rev().find(|(y, _)| y == x) {
            Some((_, t)) => *t,
            None => {
                self.diag(DiagnosticKind::UnboundVariable, format!("unbound variable `{x}`"));
                self.u.fresh()
            }
        }
    }

    fn expr(&mut self, e: &Expr, env: &mut Vec<(String, Ty)>) -> Ty {
        match e {
            Expr::Bool(_) => Ty::Bool,
            Expr::Leaf => Ty::Tree,
            Expr::Var(x) => self.lookup(env, x),
            Expr::Cmp(op, x, y) => {
                let tx = self.lookup(env, x);
                let ty = self.lookup(env, y);
                match op {
                    CmpOp::Eq => {
                        self.expect(ty, tx, "operands of `=`");
                        self.equalities.push((tx, self.current.clone(), format!("`{x}` and `{y}`")));
                    }
                    _ => {
                        self.expect(tx, Ty::Base, "comparison operand");
                        self.expect(ty, Ty::Base, "comparison operand");
                    }
                }
                Ty::Bool
            }
            Expr::If(c, t, f) => {
                let tc = self.lookup(env, c);
                self.expect(tc, Ty::Bool, "if condition");
                let a = self.expr(t, env);
                let b = self.expr(f, env);
                self.expect(b, a, "branches of if");
                a
            }
            Expr::Let(x, e1, e2) => {
                let t1 = self.expr(e1, env);
                env.push((x.clone(), t1));
                let t2 = self.expr(e2, env);
                env.pop();
                t2
            }
            Expr::Node(l, a, r) => {
                let tl = self.lookup(env, l);
                let ta = self.lookup(env, a);
                let tr = self.lookup(env, r);
                self.expect(tl, Ty::Tree, "left subtree");
                self.expect(ta, Ty::Base, "node label");
                self.expect(tr, Ty::Tree, "right subtree");
                Ty::Tree
            }
            Expr::App(f, args) => {
                let Some((params, res)) = self.sigs.get(f).cloned() else {
                    self.diag(DiagnosticKind::UndefinedFunction, format!("undefined function `{f}`"));
                    return self.u.fresh();
                };
                if params.len() != args.len() {
                    self.diag(
                        DiagnosticKind::ArityMismatch,
                        format!("`{f}` takes {} arguments, given {}", params.len(), args.len()),
                    );
                    return res;
                }
                for (i, (a, p)) in args.iter().zip(&params).enumerate() {
                    let ta = self.lookup(env, a);
                    if !self.u.unify(ta, *p) {
                        let (g, w) = (self.u.resolve(ta), self.u.resolve(*p));
                        self.diag(
                            DiagnosticKind::ArgumentTypeMismatch,
                            format!(
                                "argument {} of `{f}`: expected {}, found {} (`{a}`)",
                                i + 1,
                                show(w),
                                show(g)
                            ),
                        );
                    }
                }
                res
            }
            Expr::Match { scrutinee, leaf, node, arms } => {
                let ts = self.lookup(env, scrutinee);
                self.expect(ts, Ty::Tree, "match scrutinee");
                if *arms != MatchArms::Both {
                    self.diag(
                        DiagnosticKind::PartialMatch,
                        format!("match on `{scrutinee}` has only one arm; the other returns leaf"),
                    );
                }
                let a = self.expr(leaf, env);
                env.push((node.left.clone(), Ty::Tree));
                env.push((node.label.clone(), Ty::Base));
                env.push((node.right.clone(), Ty::Tree));
                let b = self.expr(&node.body, env);
                env.truncate(env.len() - 3);
                self.expect(b, a, "arms of match");
                a
            }
        }
    }
}

fn run(p: &Program) -> (Checker<'_>, Vec<(Vec<Ty>, Ty)>) {
    let mut ck = Checker {
        program: p,
        u: Unifier { parent: Vec::new() },
        sigs: HashMap::new(),
        diags: Vec::new(),
        current: String::new(),
        equalities: Vec::new(),
    };
    for d in &p.defs {
        let (params, res) = match &d.ty {
            Some(ft) => (ft.params.iter().map(of_simple).collect(), of_simple(&ft.result)),
            None => (d.params.iter().map(|_| ck.u.fresh()).collect(), ck.u.fresh()),
        };
        ck.sigs.insert(d.name.clone(), (params, res));
    }
    let mut resolved = Vec::new();
    for d in &ck.program.defs {
        ck.current = d.name.clone();
        let (params, res) = ck.sigs[&d.name].clone();
        if params.len() != d.params.len() {
            ck.diag(
                DiagnosticKind::ArityMismatch,
                format!("declared with {} parameters, defined with {}", params.len(), d.params.len()),
            );
            resolved.push((params, res));
            continue;
        }
        for (i, x) in d.params.iter().enumerate() {
            if d.params[..i].contains(x) {
                ck.diag(DiagnosticKind::DuplicateParameter, format!("duplicate parameter `{x}`"));
            }
        }
        let mut env: Vec<(String, Ty)> = d.params.iter().cloned().zip(params.iter().copied()).collect();
        let body = ck.expr(&d.body, &mut env);
        ck.expect(body, res, "function result");
        resolved.push((params, res));
    }
    for (t, function, what) in std::mem::take(&mut ck.equalities) {
        match ck.u.resolve(t) {
            Ty::Tree => ck.diags.push(Diagnostic {
                kind: DiagnosticKind::TypeMismatch,
                function,
                message: format!("cannot compare trees {what}"),
            }),
            // Unconstrained operands of `=` are base values.
            Ty::Var(_) => {
                ck.u.unify(t, Ty::Base);
            }
            _ => {}
        }
    }
    (ck, resolved)
}

/// Diagnostics for a program; empty iff it is well formed. Partial matches
/// are reported as [`DiagnosticKind::PartialMatch`] but do not count as errors
/// for [`is_well_formed`].
pub fn well_formed(p: &Program) -> Vec<Diagnostic> {
    run(p).0.diags
}

pub fn is_well_formed(p: &Program) -> bool {
    well_formed(p).iter().all(|d| d.kind == DiagnosticKind::PartialMatch)
}

/// Fill in `ty` for every definition. Returns the error diagnostics if the
/// program is not well formed.
pub fn infer_types(p: &mut Program) -> Result<(), Vec<Diagnostic>> {
    let (ck, resolved) = run(p);
    let errors: Vec<_> = ck.diags.iter().filter(|d| d.kind != DiagnosticKind::PartialMatch).cloned().collect();
    if !errors.is_empty() {
        return Err(errors);
    }
    let types: Vec<FunType> = resolved
        .iter()
        .map(|(ps, r)| FunType {
            params: ps.iter().map(|t| ck.u.concrete(*t)).collect(),
            result: ck.u.concrete(*r),
        })
        .collect();
    for (d, t) in p.defs.iter_mut().zip(types) {
        d.ty = Some(t);
    }
    Ok(())
}
