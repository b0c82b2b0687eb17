//! Rewrites applied to a function body before a derivation is built.

use std::collections::{BTreeSet, HashMap};

use crate::lang::{Expr, NodeArm, Var};

/// Rename binders that shadow a variable already in scope, and rebind a
/// match scrutinee that is still used in the node arm next to the arm's own
/// components (`let x = (l, a, r) in ..`).
pub fn prepare(params: &[Var], body: &Expr) -> Expr {
    let mut scope: BTreeSet<Var> = params.iter().cloned().collect();
    let mut counter = 0;
    let renamed = rename(body, &mut scope, &HashMap::new(), &mut counter);
    rebind(&renamed)
}

fn fresh(x: &str, scope: &BTreeSet<Var>, counter: &mut usize) -> Var {
    loop {
        *counter += 1;
        let v = format!("{x}'{counter}");
        if !scope.contains(&v) {
            return v;
        }
    }
}

fn bind(x: &Var, scope: &mut BTreeSet<Var>, subst: &mut HashMap<Var, Var>, counter: &mut usize) -> Var {
    let y = if scope.contains(x) { fresh(x, scope, counter) } else { x.clone() };
    scope.insert(y.clone());
    subst.insert(x.clone(), y.clone());
    y
}

fn rename(e: &Expr, scope: &mut BTreeSet<Var>, subst: &HashMap<Var, Var>, counter: &mut usize) -> Expr {
    let s = |x: &Var| subst.get(x).cloned().unwrap_or_else(|| x.clone());
    match e {
        Expr::Bool(b) => Expr::Bool(*b),
        Expr::Leaf => Expr::Leaf,
        Expr::Var(x) => Expr::Var(s(x)),
        Expr::Cmp(op, x, y) => Expr::Cmp(*op, s(x), s(y)),
        Expr::Node(l, a, r) => Expr::Node(s(l), s(a), s(r)),
        Expr::App(f, args) => Expr::App(f.clone(), args.iter().map(s).collect()),
        Expr::If(c, t, f) => Expr::If(
            s(c),
            Box::new(rename(t, scope, subst, counter)),
            Box::new(rename(f, scope, subst, counter)),
        ),
        Expr::Let(x, e1, e2) => {
            let e1 = rename(e1, scope, subst, counter);
            let mut inner = subst.clone();
            let y = bind(x, scope, &mut inner, counter);
            let e2 = rename(e2, scope, &inner, counter);
            Expr::Let(y, Box::new(e1), Box::new(e2))
        }
        Expr::Match { scrutinee, leaf, node, arms } => {
            let leaf = rename(leaf, scope, subst, counter);
            let mut inner = subst.clone();
            let left = bind(&node.left, scope, &mut inner, counter);
            let label = bind(&node.label, scope, &mut inner, counter);
            let right = bind(&node.right, scope, &mut inner, counter);
            let body = rename(&node.body, scope, &inner, counter);
            Expr::Match {
                scrutinee: s(scrutinee),
                leaf: Box::new(leaf),
                node: NodeArm { left, label, right, body: Box::new(body) },
                arms: *arms,
            }
        }
    }
}

fn rebind(e: &Expr) -> Expr {
    match e {
        Expr::If(c, t, f) => Expr::If(c.clone(), Box::new(rebind(t)), Box::new(rebind(f))),
        Expr::Let(x, e1, e2) => Expr::Let(x.clone(), Box::new(rebind(e1)), Box::new(rebind(e2))),
        Expr::Match { scrutinee, leaf, node, arms } => {
            let mut body = rebind(&node.body);
            let fv = body.free_vars();
            let parts_used = fv.contains(&node.left) || fv.contains(&node.label) || fv.contains(&node.right);
            if fv.contains(scrutinee) && parts_used {
                body = Expr::let_in(
                    scrutinee.clone(),
                    Expr::node(node.left.clone(), node.label.clone(), node.right.clone()),
                    body,
                );
            }
            Expr::Match {
                scrutinee: scrutinee.clone(),
                leaf: Box::new(rebind(leaf)),
                node: NodeArm { body: Box::new(body), ..node.clone() },
                arms: *arms,
            }
        }
        other => other.clone(),
    }
}

/// Replace free occurrences of `x` by `y` (no capture: binders are unique).
pub fn substitute(e: &Expr, x: &str, y: &str) -> Expr {
    let s = |v: &Var| if v == x { y.to_string() } else { v.clone() };
    match e {
        Expr::Bool(_) | Expr::Leaf => e.clone(),
        Expr::Var(v) => Expr::Var(s(v)),
        Expr::Cmp(op, a, b) => Expr::Cmp(*op, s(a), s(b)),
        Expr::Node(l, a, r) => Expr::Node(s(l), s(a), s(r)),
        Expr::App(f, args) => Expr::App(f.clone(), args.iter().map(s).collect()),
        Expr::If(c, t, f) => Expr::If(s(c), Box::new(substitute(t, x, y)), Box::new(substitute(f, x, y))),
        Expr::Let(v, e1, e2) => {
            let e2 = if v == x { (**e2).clone() } else { substitute(e2, x, y) };
            Expr::Let(v.clone(), Box::new(substitute(e1, x, y)), Box::new(e2))
        }
        Expr::Match { scrutinee, leaf, node, arms } => {
            let shadowed = [&node.left, &node.label, &node.right].iter().any(|v| *v == x);
            let body = if shadowed { (*node.body).clone() } else { substitute(&node.body, x, y) };
            Expr::Match {
                scrutinee: s(scrutinee),
                leaf: Box::new(substitute(leaf, x, y)),
                node: NodeArm { body: Box::new(body), ..node.clone() },
                arms: *arms,
            }
        }
    }
}
