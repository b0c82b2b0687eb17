//! Exact rational linear programming.

mod simplex;

use std::fmt::Write;

use num_traits::{One, Signed, Zero};

use crate::potential::Rat;

pub use simplex::SolveStats;

pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: &Rat, rhs: &Rat) -> bool {
        match self {
            Rel::Le => lhs <= rhs,
            Rel::Eq => lhs == rhs,
            Rel::Ge => lhs >= rhs,
        }
    }
}

/// `Σ coeffs (rel) rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<(VarId, Rat)>,
    pub rel: Rel,
    pub rhs: Rat,
    pub label: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearProgram {
    names: Vec<String>,
    nonneg: Vec<bool>,
    rows: Vec<Row>,
    objectives: Vec<Vec<(VarId, Rat)>>,
}

/// Merge duplicate variables and drop zero coefficients.
pub fn normalize_terms(terms: impl IntoIterator<Item = (VarId, Rat)>) -> Vec<(VarId, Rat)> {
    let mut v: Vec<(VarId, Rat)> = terms.into_iter().collect();
    v.sort_by_key(|(x, _)| *x);
    let mut out: Vec<(VarId, Rat)> = Vec::with_capacity(v.len());
    for (x, c) in v {
        match out.last_mut() {
            Some((y, d)) if *y == x => *d += c,
            _ => out.push((x, c)),
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, nonneg: bool) -> VarId {
        self.names.push(name.into());
        self.nonneg.push(nonneg);
        self.names.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, x: VarId) -> &str {
        &self.names[x]
    }

    pub fn is_nonneg(&self, x: VarId) -> bool {
        self.nonneg[x]
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn add_row(&mut self, coeffs: impl IntoIterator<Item = (VarId, Rat)>, rel: Rel, rhs: Rat) {
        self.add_labeled_row(coeffs, rel, rhs, None);
    }

    pub fn add_labeled_row(
        &mut self,
        coeffs: impl IntoIterator<Item = (VarId, Rat)>,
        rel: Rel,
        rhs: Rat,
        label: Option<String>,
    ) {
        let coeffs = normalize_terms(coeffs);
        assert!(coeffs.iter().all(|(x, _)| *x < self.names.len()), "row references an undeclared variable");
        self.rows.push(Row { coeffs, rel, rhs, label });
    }

    /// Replace the objective list with a single minimisation objective.
    pub fn set_objective(&mut self, terms: impl IntoIterator<Item = (VarId, Rat)>) {
        self.objectives = vec![normalize_terms(terms)];
    }

    /// Objectives minimised lexicographically after the ones already set.
    pub fn push_objective(&mut self, terms: impl IntoIterator<Item = (VarId, Rat)>) {
        self.objectives.push(normalize_terms(terms));
    }

    pub fn objectives(&self) -> &[Vec<(VarId, Rat)>] {
        &self.objectives
    }

    /// Whether `x` satisfies every row and sign constraint exactly.
    pub fn check_assignment(&self, x: &[Rat]) -> Result<bool, String> {
        if x.len() != self.num_vars() {
            return Err(format!("assignment has {} values, program has {} variables", x.len(), self.num_vars()));
        }
        if self.nonneg.iter().zip(x).any(|(nn, v)| *nn && v.is_negative()) {
            return Ok(false);
        }
        Ok(self.rows.iter().all(|r| r.rel.holds(&eval_terms(&r.coeffs, x), &r.rhs)))
    }

    /// Rows violated by `x`, by index.
    pub fn violated_rows(&self, x: &[Rat]) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&i| {
                let r = &self.rows[i];
                !r.rel.holds(&eval_terms(&r.coeffs, x), &r.rhs)
            })
            .collect()
    }

    /// Plain-text dump, one row per line, rationals as `p/q`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let terms = |ts: &[(VarId, Rat)]| {
            if ts.is_empty() {
                return "0".to_string();
            }
            ts.iter().map(|(x, c)| format!("{c} {}", self.names[*x])).collect::<Vec<_>>().join(" + ")
        };
        for (k, obj) in self.objectives.iter().enumerate() {
            writeln!(out, "min{k}: {}", terms(obj)).unwrap();
        }
        for (i, r) in self.rows.iter().enumerate() {
            let label = r.label.clone().unwrap_or_else(|| format!("r{i}"));
            writeln!(out, "{label}: {} {} {}", terms(&r.coeffs), r.rel.symbol(), r.rhs).unwrap();
        }
        let free: Vec<&str> =
            (0..self.num_vars()).filter(|&x| !self.nonneg[x]).map(|x| self.names[x].as_str()).collect();
        if !free.is_empty() {
            writeln!(out, "free: {}", free.join(" ")).unwrap();
        }
        out
    }
}

pub fn eval_terms(terms: &[(VarId, Rat)], x: &[Rat]) -> Rat {
    let mut s = Rat::zero();
    for (v, c) in terms {
        if !x[*v].is_zero() {
            s += c * &x[*v];
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Values of all variables (empty unless optimal).
    pub assignment: Vec<Rat>,
    /// Optimal value of each objective in order.
    pub objective: Vec<Rat>,
    /// For infeasible programs: multipliers `y`, one per row, with `y ≥ 0`
    /// on `≥` rows, `y ≤ 0` on `≤` rows, `Σ yᵢ·rowᵢ ≤ 0` on every
    /// nonnegative variable, `= 0` on every free one, and `Σ yᵢ·rhsᵢ > 0`.
    pub farkas_ray: Option<Vec<Rat>>,
    pub stats: SolveStats,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Check an infeasibility ray against the program, exactly.
pub fn check_farkas_ray(lp: &LinearProgram, y: &[Rat]) -> bool {
    if y.len() != lp.rows.len() {
        return false;
    }
    let mut col = vec![Rat::zero(); lp.num_vars()];
    let mut rhs = Rat::zero();
    for (r, yi) in lp.rows.iter().zip(y) {
        let sign_ok = match r.rel {
            Rel::Le => !yi.is_positive(),
            Rel::Ge => !yi.is_negative(),
            Rel::Eq => true,
        };
        if !sign_ok {
            return false;
        }
        if yi.is_zero() {
            continue;
        }
        for (x, c) in &r.coeffs {
            col[*x] += c * yi;
        }
        rhs += &r.rhs * yi;
    }
    rhs.is_positive()
        && col.iter().enumerate().all(|(x, c)| if lp.nonneg[x] { !c.is_positive() } else { c.is_zero() })
}

pub fn solve(lp: &LinearProgram) -> LpOutcome {
    simplex::solve(lp)
}

/// `Σ cᵢ·xᵢ + constant` over program variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LinExpr {
    pub terms: Vec<(VarId, Rat)>,
    pub constant: Rat,
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr::default()
    }

    pub fn constant(c: Rat) -> Self {
        LinExpr { terms: Vec::new(), constant: c }
    }

    pub fn var(x: VarId) -> Self {
        LinExpr { terms: vec![(x, Rat::one())], constant: Rat::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    /// The value if the expression has no variables.
    pub fn as_constant(&self) -> Option<&Rat> {
        self.terms.is_empty().then_some(&self.constant)
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        self.add_scaled(&Rat::one(), other)
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add_scaled(&-Rat::one(), other)
    }

    pub fn add_scaled(&self, f: &Rat, other: &LinExpr) -> LinExpr {
        if f.is_zero() || other.is_zero() {
            return self.clone();
        }
        let terms = normalize_terms(
            self.terms.iter().cloned().chain(other.terms.iter().map(|(x, c)| (*x, f * c))),
        );
        LinExpr { terms, constant: &self.constant + f * &other.constant }
    }

    pub fn add_const(&self, c: &Rat) -> LinExpr {
        LinExpr { terms: self.terms.clone(), constant: &self.constant + c }
    }

    pub fn scale(&self, f: &Rat) -> LinExpr {
        if f.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            terms: self.terms.iter().map(|(x, c)| (*x, c * f)).collect(),
            constant: &self.constant * f,
        }
    }

    pub fn eval(&self, x: &[Rat]) -> Rat {
        eval_terms(&self.terms, x) + &self.constant
    }
}

impl From<Rat> for LinExpr {
    fn from(c: Rat) -> Self {
        LinExpr::constant(c)
    }
}

impl LinearProgram {
    /// Add `e (rel) 0`.
    pub fn constrain(&mut self, e: &LinExpr, rel: Rel, label: Option<String>) {
        self.add_labeled_row(e.terms.iter().cloned(), rel, -e.constant.clone(), label);
    }
}
