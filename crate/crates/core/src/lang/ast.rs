use std::collections::BTreeSet;
use std::fmt;

pub type Var = String;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Gt,
    Eq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Eq => "=",
        }
    }
}

/// Which arm of a `match` was written in the source. A missing arm is
/// filled in with `leaf` by the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchArms {
    Both,
    LeafOnly,
    NodeOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeArm {
    pub left: Var,
    pub label: Var,
    pub right: Var,
    pub body: Box<Expr>,
}

/// Expressions in let normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Bool(bool),
    Var(Var),
    Cmp(CmpOp, Var, Var),
    If(Var, Box<Expr>, Box<Expr>),
    Let(Var, Box<Expr>, Box<Expr>),
    App(String, Vec<Var>),
    Leaf,
    Node(Var, Var, Var),
    Match {
        scrutinee: Var,
        leaf: Box<Expr>,
        node: NodeArm,
        arms: MatchArms,
    },
}

impl Expr {
    pub fn var(x: impl Into<Var>) -> Expr {
        Expr::Var(x.into())
    }

    pub fn node(l: impl Into<Var>, a: impl Into<Var>, r: impl Into<Var>) -> Expr {
        Expr::Node(l.into(), a.into(), r.into())
    }

    pub fn let_in(x: impl Into<Var>, bound: Expr, body: Expr) -> Expr {
        Expr::Let(x.into(), Box::new(bound), Box::new(body))
    }

    pub fn app(f: impl Into<String>, args: &[&str]) -> Expr {
        Expr::App(f.into(), args.iter().map(|s| s.to_string()).collect())
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    /// Free variables with multiplicity, in left-to-right order of use.
    pub fn free_occurrences(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_occurrences(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut occ = Vec::new();
        self.collect_occurrences(bound, &mut occ);
        out.extend(occ);
    }

    fn collect_occurrences(&self, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
        let push = |x: &Var, bound: &Vec<Var>, out: &mut Vec<Var>| {
            if !bound.contains(x) {
                out.push(x.clone());
            }
        };
        match self {
            Expr::Bool(_) | Expr::Leaf => {}
            Expr::Var(x) => push(x, bound, out),
            Expr::Cmp(_, x, y) => {
                push(x, bound, out);
                push(y, bound, out);
            }
            Expr::If(c, t, e) => {
                push(c, bound, out);
                t.collect_occurrences(bound, out);
                e.collect_occurrences(bound, out);
            }
            Expr::Let(x, e1, e2) => {
                e1.collect_occurrences(bound, out);
                bound.push(x.clone());
                e2.collect_occurrences(bound, out);
                bound.pop();
            }
            Expr::App(_, args) => {
                for a in args {
                    push(a, bound, out);
                }
            }
            Expr::Node(l, a, r) => {
                push(l, bound, out);
                push(a, bound, out);
                push(r, bound, out);
            }
            Expr::Match {
                scrutinee,
                leaf,
                node,
                ..
            } => {
                push(scrutinee, bound, out);
                leaf.collect_occurrences(bound, out);
                let depth = bound.len();
                bound.push(node.left.clone());
                bound.push(node.label.clone());
                bound.push(node.right.clone());
                node.body.collect_occurrences(bound, out);
                bound.truncate(depth);
            }
        }
    }

    /// Every function name applied somewhere in the expression.
    pub fn callees(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::App(f, _) = e {
                out.insert(f.clone());
            }
        });
        out
    }

    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::If(_, t, e) => {
                t.walk(f);
                e.walk(f);
            }
            Expr::Let(_, e1, e2) => {
                e1.walk(f);
                e2.walk(f);
            }
            Expr::Match { leaf, node, .. } => {
                leaf.walk(f);
                node.body.walk(f);
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SimpleType {
    Bool,
    Base,
    Tree,
    Product(Vec<SimpleType>),
}

impl SimpleType {
    pub fn is_tree(&self) -> bool {
        matches!(self, SimpleType::Tree)
    }

    /// Number of tree components (0 or 1 for non-products).
    pub fn tree_count(&self) -> usize {
        match self {
            SimpleType::Tree => 1,
            SimpleType::Product(ts) => ts.iter().filter(|t| t.is_tree()).count(),
            _ => 0,
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Bool => write!(f, "Bool"),
            SimpleType::Base => write!(f, "B"),
            SimpleType::Tree => write!(f, "T"),
            SimpleType::Product(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    write!(f, "{t}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunType {
    pub params: Vec<SimpleType>,
    pub result: SimpleType,
}

impl FunType {
    pub fn arg_type(&self) -> SimpleType {
        if self.params.len() == 1 {
            self.params[0].clone()
        } else {
            SimpleType::Product(self.params.clone())
        }
    }
}

impl fmt::Display for FunType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.params.is_empty() {
            write!(f, "Unit")?;
        }
        for (i, t) in self.params.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, " -> {}", self.result)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunDef {
    pub name: String,
    pub params: Vec<Var>,
    pub body: Expr,
    /// Declared type, or the one filled in by [`crate::lang::infer_types`].
    pub ty: Option<FunType>,
    pub pos: Pos,
}

/// Function definitions in source order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub defs: Vec<FunDef>,
}

impl Program {
    pub fn get(&self, name: &str) -> Option<&FunDef> {
        self.defs.iter().find(|d| d.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.defs.iter().map(|d| d.name.as_str())
    }

    pub fn fun_type(&self, name: &str) -> Option<&FunType> {
        self.get(name).and_then(|d| d.ty.as_ref())
    }

    /// AST equality ignoring source positions.
    pub fn same_ast(&self, other: &Program) -> bool {
        self.defs.len() == other.defs.len()
            && self.defs.iter().zip(&other.defs).all(|(a, b)| {
                a.name == b.name && a.params == b.params && a.body == b.body && a.ty == b.ty
            })
    }
}
