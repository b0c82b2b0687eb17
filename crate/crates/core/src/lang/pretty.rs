use std::fmt::Write;

use super::ast::*;

/// Render a program in concrete syntax; `parse` of the output yields the same AST.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for (i, d) in p.defs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        if let Some(ty) = &d.ty {
            writeln!(out, "{} : {}", d.name, ty).unwrap();
        }
        write!(out, "{}", d.name).unwrap();
        for x in &d.params {
            write!(out, " {x}").unwrap();
        }
        out.push_str(" =\n");
        print_expr(&d.body, 1, &mut out);
        out.push('\n');
    }
    out
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut out = String::new();
    print_expr(e, 0, &mut out);
    out
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn print_expr(e: &Expr, level: usize, out: &mut String) {
    indent(level, out);
    match e {
        Expr::Bool(b) => write!(out, "{b}").unwrap(),
        Expr::Var(x) => out.push_str(x),
        Expr::Cmp(op, x, y) => write!(out, "{x} {} {y}", op.symbol()).unwrap(),
        Expr::Leaf => out.push_str("leaf"),
        Expr::Node(l, a, r) => write!(out, "({l}, {a}, {r})").unwrap(),
        Expr::App(f, args) => {
            out.push_str(f);
            for a in args {
                write!(out, " {a}").unwrap();
            }
        }
        Expr::If(c, t, f) => {
            writeln!(out, "(if {c} then").unwrap();
            print_expr(t, level + 1, out);
            out.push('\n');
            indent(level, out);
            out.push_str("else\n");
            print_expr(f, level + 1, out);
            out.push(')');
        }
        Expr::Let(x, e1, e2) => {
            writeln!(out, "(let {x} =").unwrap();
            print_expr(e1, level + 1, out);
            out.push('\n');
            indent(level, out);
            out.push_str("in\n");
            print_expr(e2, level + 1, out);
            out.push(')');
        }
        Expr::Match { scrutinee, leaf, node, arms } => {
            write!(out, "(match {scrutinee} with").unwrap();
            if *arms != MatchArms::NodeOnly {
                out.push('\n');
                indent(level, out);
                out.push_str("| leaf ->\n");
                print_expr(leaf, level + 1, out);
            }
            if *arms != MatchArms::LeafOnly {
                out.push('\n');
                indent(level, out);
                writeln!(out, "| node {} {} {} ->", node.left, node.label, node.right).unwrap();
                print_expr(&node.body, level + 1, out);
            }
            out.push(')');
        }
    }
}
