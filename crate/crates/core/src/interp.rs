//! Big-step evaluator that counts function applications.

use std::fmt;
use std::rc::Rc;

use serde::Serialize;

use crate::lang::{CmpOp, Expr, Program, Value, Var};
use crate::Mode;

pub const DEFAULT_FUEL: u64 = 1_000_000;

/// Variable bindings; later bindings shadow earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    binds: Vec<(Var, Value)>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn bind(&mut self, x: impl Into<Var>, v: Value) {
        self.binds.push((x.into(), v));
    }

    pub fn with(mut self, x: impl Into<Var>, v: Value) -> Env {
        self.bind(x, v);
        self
    }

    pub fn get(&self, x: &str) -> Option<&Value> {
        self.binds.iter().rev().find(|(y, _)| y == x).map(|(_, v)| v)
    }
}

impl<S: Into<Var>> FromIterator<(S, Value)> for Env {
    fn from_iter<I: IntoIterator<Item = (S, Value)>>(iter: I) -> Env {
        Env { binds: iter.into_iter().map(|(x, v)| (x.into(), v)).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub rule: &'static str,
    /// Nesting depth of the evaluation this step belongs to.
    pub depth: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalResult {
    pub value: Value,
    pub cost: u64,
    pub steps: Option<Vec<Step>>,
}

impl EvalResult {
    /// The trace as JSON lines, one rule application per line.
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for s in self.steps.iter().flatten() {
            out.push_str(&serde_json::to_string(s).expect("steps serialize"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("no result within {fuel} applications (possible nontermination)")]
    OutOfFuel { fuel: u64 },
    #[error("evaluation stuck: {0}")]
    Stuck(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub mode: Mode,
    pub fuel: u64,
    pub trace: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { mode: Mode::Costed, fuel: DEFAULT_FUEL, trace: false }
    }
}

impl EvalOptions {
    pub fn mode(mode: Mode) -> Self {
        EvalOptions { mode, ..Default::default() }
    }
}

/// The evaluator's own environment: a shared linked list, cheap to clone.
type Local<'p> = Option<Rc<Frame<'p>>>;

struct Frame<'p> {
    name: &'p str,
    value: Value,
    next: Local<'p>,
}

fn bind<'p>(env: Local<'p>, name: &'p str, value: Value) -> Local<'p> {
    Some(Rc::new(Frame { name, value, next: env }))
}

struct Machine<'p> {
    program: &'p Program,
    opts: EvalOptions,
    applications: u64,
    cost: u64,
    steps: Option<Vec<Step>>,
}

fn stuck<T>(msg: impl fmt::Display) -> Result<T, EvalError> {
    Err(EvalError::Stuck(msg.to_string()))
}

impl<'p> Machine<'p> {
    fn log(&mut self, rule: &'static str, depth: usize, function: Option<&str>, value: Option<&Value>) {
        if let Some(steps) = &mut self.steps {
            steps.push(Step {
                rule,
                depth,
                function: function.map(str::to_string),
                value: value.map(|v| v.to_string()),
            });
        }
    }

    fn lookup(env: &Local<'p>, x: &str) -> Result<Value, EvalError> {
        let mut cur = env;
        while let Some(f) = cur {
            if f.name == x {
                return Ok(f.value.clone());
            }
            cur = &f.next;
        }
        stuck(format!("unbound variable `{x}`"))
    }

    /// Tail positions (if branches, let bodies, match arms, calls) loop
    /// instead of recursing, so tail recursion runs in constant stack.
    fn eval(&mut self, mut env: Local<'p>, mut e: &'p Expr, depth: usize) -> Result<Value, EvalError> {
        let program = self.program;
        loop {
            match e {
                Expr::Bool(b) => {
                    self.log("bool", depth, None, None);
                    return Ok(Value::Bool(*b));
                }
                Expr::Leaf => {
                    self.log("leaf", depth, None, None);
                    return Ok(Value::Leaf);
                }
                Expr::Var(x) => {
                    self.log("var", depth, None, None);
                    return Self::lookup(&env, x);
                }
                Expr::Cmp(op, x, y) => {
                    let (a, b) = (Self::lookup(&env, x)?, Self::lookup(&env, y)?);
                    let r = match (op, &a, &b) {
                        (CmpOp::Lt, Value::Base(m), Value::Base(n)) => m < n,
                        (CmpOp::Gt, Value::Base(m), Value::Base(n)) => m > n,
                        (CmpOp::Eq, Value::Base(m), Value::Base(n)) => m == n,
                        (CmpOp::Eq, Value::Bool(m), Value::Bool(n)) => m == n,
                        _ => return stuck(format!("cannot compare {a} {} {b}", op.symbol())),
                    };
                    self.log("cmp", depth, None, None);
                    return Ok(Value::Bool(r));
                }
                Expr::Node(l, a, r) => {
                    let (l, a, r) = (Self::lookup(&env, l)?, Self::lookup(&env, a)?, Self::lookup(&env, r)?);
                    return match (l.is_tree(), a, r.is_tree()) {
                        (true, Value::Base(a), true) => {
                            self.log("node", depth, None, None);
                            Ok(Value::node(l, a, r))
                        }
                        (_, a, _) => stuck(format!("ill-typed node ({l}, {a}, {r})")),
                    };
                }
                Expr::If(c, t, f) => match Self::lookup(&env, c)? {
                    Value::Bool(true) => {
                        self.log("if-true", depth, None, None);
                        e = t;
                    }
                    Value::Bool(false) => {
                        self.log("if-false", depth, None, None);
                        e = f;
                    }
                    v => return stuck(format!("if condition `{c}` is {v}, not a boolean")),
                },
                Expr::Let(x, e1, e2) => {
                    let v = self.eval(env.clone(), e1, depth + 1)?;
                    self.log("let", depth, None, Some(&v));
                    env = bind(env, x, v);
                    e = e2;
                }
                Expr::Match { scrutinee, leaf, node, .. } => match Self::lookup(&env, scrutinee)? {
                    Value::Leaf => {
                        self.log("match-leaf", depth, None, None);
                        e = leaf;
                    }
                    Value::Node(l, a, r) => {
                        self.log("match-node", depth, None, None);
                        env = bind(env, &node.left, (*l).clone());
                        env = bind(env, &node.label, Value::Base(a));
                        env = bind(env, &node.right, (*r).clone());
                        e = &node.body;
                    }
                    v => return stuck(format!("match on non-tree value {v}")),
                },
                Expr::App(f, args) => {
                    let Some(def) = program.get(f) else {
                        return stuck(format!("undefined function `{f}`"));
                    };
                    if def.params.len() != args.len() {
                        return stuck(format!("`{f}` applied to {} arguments", args.len()));
                    }
                    if self.applications >= self.opts.fuel {
                        return Err(EvalError::OutOfFuel { fuel: self.opts.fuel });
                    }
                    self.applications += 1;
                    if self.opts.mode == Mode::Costed {
                        self.cost += 1;
                    }
                    let mut callee = None;
                    for (p, a) in def.params.iter().zip(args) {
                        callee = bind(callee, p, Self::lookup(&env, a)?);
                    }
                    self.log("app", depth, Some(f), None);
                    env = callee;
                    e = &def.body;
                }
            }
        }
    }
}

/// Evaluate `e` under `env`. The cost is the number of applications in
/// costed mode and 0 in cost-free mode.
pub fn evaluate(p: &Program, env: &Env, e: &Expr, opts: EvalOptions) -> Result<EvalResult, EvalError> {
    let mut m = Machine {
        program: p,
        opts,
        applications: 0,
        cost: 0,
        steps: opts.trace.then(Vec::new),
    };
    let mut local = None;
    for (x, v) in &env.binds {
        local = bind(local, x, v.clone());
    }
    let value = m.eval(local, e, 0)?;
    Ok(EvalResult { value, cost: m.cost, steps: m.steps })
}

/// Call `f` on `args`; in costed mode the cost includes the outer call.
pub fn run_function(p: &Program, f: &str, args: &[Value], opts: EvalOptions) -> Result<EvalResult, EvalError> {
    let names: Vec<String> = (0..args.len()).map(|i| format!("$arg{i}")).collect();
    let env: Env = names.iter().cloned().zip(args.iter().cloned()).collect();
    evaluate(p, &env, &Expr::App(f.to_string(), names), opts)
}
