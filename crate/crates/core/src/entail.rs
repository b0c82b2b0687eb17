//! Comparison of symbolic log potentials through facts about logarithms and
//! Farkas multipliers.
//!
//! Atoms `log(a1|x1| + .. + am|xm| + b)` are treated as nonnegative unknowns.
//! A goal `U·x ≤ v` follows from facts `A·x ≤ b` whenever some `F ≥ 0`
//! satisfies `U ≤ F·A` and `F·b ≤ v`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::potential::{rat, Annotation, IndexTemplate, LogIndex, Rat};
use crate::ratlp::{self, LinExpr, LinearProgram, Rel, VarId};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PotentialAtom {
    RankOf(usize),
    LogOf(LogIndex),
}

/// Render an atom with slot names, e.g. `log(|bl| + |br| + 2)`.
pub fn atom_string(idx: &LogIndex, names: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &a) in idx.a.iter().enumerate() {
        let name = names.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1));
        match a {
            0 => {}
            1 => parts.push(format!("|{name}|")),
            a => parts.push(format!("{a}|{name}|")),
        }
    }
    if idx.b != 0 || parts.is_empty() {
        parts.push(idx.b.to_string());
    }
    format!("log({})", parts.join(" + "))
}

/// Whether the atom's argument is at least 1 for all tree sizes.
fn at_least_one(idx: &LogIndex) -> bool {
    idx.b >= 1 || !idx.is_constant()
}

/// `arg(u) ≤ arg(v)` for every assignment of sizes ≥ 1.
pub fn argument_le(u: &LogIndex, v: &LogIndex) -> bool {
    let su: u32 = u.a.iter().sum::<u32>() + u.b;
    let sv: u32 = v.a.iter().sum::<u32>() + v.b;
    u.a.iter().zip(&v.a).all(|(x, y)| x <= y) && su <= sv
}

fn sum_index(u: &LogIndex, v: &LogIndex) -> LogIndex {
    LogIndex::new(u.a.iter().zip(&v.a).map(|(x, y)| x + y).collect(), u.b + v.b)
}

/// `Φ(lhs) ≥ Φ(rhs)` over the log atoms of a context with `arity` trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    pub arity: usize,
    pub lhs: BTreeMap<LogIndex, LinExpr>,
    pub rhs: BTreeMap<LogIndex, LinExpr>,
}

impl Obligation {
    pub fn new(arity: usize) -> Self {
        Obligation { arity, lhs: BTreeMap::new(), rhs: BTreeMap::new() }
    }

    /// The log parts of two known annotations of equal arity.
    pub fn from_annotations(lhs: &Annotation, rhs: &Annotation) -> Self {
        assert_eq!(lhs.arity(), rhs.arity());
        let side = |q: &Annotation| q.logs().map(|(i, c)| (i.clone(), LinExpr::constant(c.clone()))).collect();
        Obligation { arity: lhs.arity(), lhs: side(lhs), rhs: side(rhs) }
    }

    /// Per-atom goal coefficients `rhs − lhs`, so the goal reads `U·x ≤ 0`.
    pub fn goal(&self, atoms: &[LogIndex]) -> Vec<LinExpr> {
        atoms
            .iter()
            .map(|k| {
                let r = self.rhs.get(k).cloned().unwrap_or_default();
                match self.lhs.get(k) {
                    Some(l) => r.sub(l),
                    None => r,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Closure {
    /// Only the atoms occurring in the obligation.
    None,
    /// Also every sum of two atoms (both with argument ≥ 1).
    Pairwise,
    /// Pairwise sums that stay inside a template.
    Within(IndexTemplate),
}

/// Atoms of both sides, closed under sums as requested; sorted.
pub fn collect_atoms(ob: &Obligation, closure: &Closure) -> Vec<LogIndex> {
    let mut set: BTreeSet<LogIndex> = ob.lhs.keys().chain(ob.rhs.keys()).cloned().collect();
    if *closure != Closure::None {
        let base: Vec<LogIndex> = set.iter().filter(|i| at_least_one(i)).cloned().collect();
        for (i, u) in base.iter().enumerate() {
            for v in &base[i..] {
                let s = sum_index(u, v);
                let keep = match closure {
                    Closure::Within(t) => t.contains(&s),
                    _ => true,
                };
                if keep {
                    set.insert(s);
                }
            }
        }
    }
    set.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Schema {
    /// Monotonicity of log.
    F1,
    /// `2 + log x + log y ≤ 2·log(x + y)` for `x, y ≥ 1`.
    F2,
    /// Values of constant atoms.
    F3,
    /// Nonnegativity.
    F4,
}

/// One fact `Σ terms ≤ rhs`, terms indexed into the atom list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactRow {
    pub schema: Schema,
    pub terms: Vec<(usize, Rat)>,
    pub rhs: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactSystem {
    pub atoms: Vec<LogIndex>,
    pub rows: Vec<FactRow>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactOptions {
    /// Generate `2 + log u + log v ≤ 2 log(u + v)` only when `u` and `v`
    /// have disjoint nonempty supports and no constant part.
    pub disjoint_log_sums: bool,
    /// Emit explicit `atom ≥ 0` rows (implied by the `U ≤ F·A` reading).
    pub nonnegativity: bool,
}

impl Default for FactOptions {
    fn default() -> Self {
        FactOptions { disjoint_log_sums: false, nonnegativity: true }
    }
}

fn floor_ceil_log2(b: u32) -> (u32, u32) {
    let fl = 31 - b.leading_zeros();
    if b.is_power_of_two() {
        (fl, fl)
    } else {
        (fl, fl + 1)
    }
}

/// Facts F1–F4 over the given atoms.
pub fn expert_facts(atoms: &[LogIndex], opts: &FactOptions) -> FactSystem {
    let mut rows = Vec::new();
    let n = atoms.len();
    let pos: BTreeMap<&LogIndex, usize> = atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();

    // F1 on the covering pairs of the order, so chains are derived rather
    // than stated. Distinct atoms never have the same argument, so the order
    // is strict on the list.
    let words = n.div_ceil(64);
    let mut below = vec![vec![0u64; words]; n];
    let mut above = vec![vec![0u64; words]; n];
    for u in 0..n {
        for v in 0..n {
            if u != v && argument_le(&atoms[u], &atoms[v]) {
                above[u][v / 64] |= 1 << (v % 64);
                below[v][u / 64] |= 1 << (u % 64);
            }
        }
    }
    for u in 0..n {
        for v in 0..n {
            if above[u][v / 64] & (1 << (v % 64)) == 0 {
                continue;
            }
            let between = above[u].iter().zip(&below[v]).any(|(x, y)| x & y != 0);
            if !between {
                rows.push(FactRow { schema: Schema::F1, terms: vec![(u, rat(1)), (v, rat(-1))], rhs: Rat::zero() });
            }
        }
    }

    for u in 0..n {
        for v in u..n {
            let (x, y) = (&atoms[u], &atoms[v]);
            if !at_least_one(x) || !at_least_one(y) {
                continue;
            }
            if opts.disjoint_log_sums {
                let disjoint = x.a.iter().zip(&y.a).all(|(p, q)| *p == 0 || *q == 0);
                if !disjoint || x.b != 0 || y.b != 0 || x.is_constant() || y.is_constant() {
                    continue;
                }
            }
            let Some(&s) = pos.get(&sum_index(x, y)) else { continue };
            let mut terms = vec![(u, rat(1)), (v, rat(1)), (s, rat(-2))];
            terms = merge(terms);
            rows.push(FactRow { schema: Schema::F2, terms, rhs: rat(-2) });
        }
    }

    for (k, idx) in atoms.iter().enumerate() {
        if !idx.is_constant() {
            continue;
        }
        let (lo, hi) = if idx.b == 0 { (0, 0) } else { floor_ceil_log2(idx.b) };
        rows.push(FactRow { schema: Schema::F3, terms: vec![(k, rat(1))], rhs: rat(hi.into()) });
        rows.push(FactRow { schema: Schema::F3, terms: vec![(k, rat(-1))], rhs: rat(-i64::from(lo)) });
    }

    if opts.nonnegativity {
        for (k, idx) in atoms.iter().enumerate() {
            if at_least_one(idx) {
                rows.push(FactRow { schema: Schema::F4, terms: vec![(k, rat(-1))], rhs: Rat::zero() });
            }
        }
    }
    FactSystem { atoms: atoms.to_vec(), rows }
}

fn merge(terms: Vec<(usize, Rat)>) -> Vec<(usize, Rat)> {
    let mut m: BTreeMap<usize, Rat> = BTreeMap::new();
    for (k, c) in terms {
        *m.entry(k).or_insert_with(Rat::zero) += c;
    }
    m.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

impl FactSystem {
    /// Evaluate every row at real log values of the given sizes; returns the
    /// largest violation (0 if all rows hold).
    pub fn max_violation(&self, sizes: &[u64]) -> f64 {
        let vals: Vec<f64> = self.atoms.iter().map(|a| a.eval(sizes)).collect();
        self.rows
            .iter()
            .map(|r| {
                let lhs: f64 = r.terms.iter().map(|(k, c)| crate::potential::to_f64(c) * vals[*k]).sum();
                (lhs - crate::potential::to_f64(&r.rhs)).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    pub fn describe_row(&self, i: usize, names: &[String]) -> String {
        let r = &self.rows[i];
        let terms: Vec<String> =
            r.terms.iter().map(|(k, c)| format!("{c}·{}", atom_string(&self.atoms[*k], names))).collect();
        format!("{:?}: {} <= {}", r.schema, terms.join(" + "), r.rhs)
    }
}

/// Multipliers, one row per goal, one entry per fact row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<Vec<Rat>>,
}

/// A goal row `U·x ≤ v` with known coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal {
    pub u: Vec<Rat>,
    pub v: Rat,
}

impl FarkasCertificate {
    /// Exact re-check: `F ≥ 0`, `U ≤ F·A`, `F·b ≤ v` for every goal.
    pub fn check(&self, facts: &FactSystem, goals: &[Goal]) -> bool {
        if self.multipliers.len() != goals.len() {
            return false;
        }
        self.multipliers.iter().zip(goals).all(|(f, g)| {
            if f.len() != facts.rows.len() || g.u.len() != facts.atoms.len() || f.iter().any(Signed::is_negative) {
                return false;
            }
            let mut fa = vec![Rat::zero(); facts.atoms.len()];
            let mut fb = Rat::zero();
            for (m, row) in f.iter().zip(&facts.rows) {
                if m.is_zero() {
                    continue;
                }
                for (k, c) in &row.terms {
                    fa[*k] += m * c;
                }
                fb += m * &row.rhs;
            }
            g.u.iter().zip(&fa).all(|(u, a)| u <= a) && fb <= g.v
        })
    }

    /// JSON with atoms, fact rows and the nonzero multipliers.
    pub fn to_json(&self, facts: &FactSystem, names: &[String]) -> serde_json::Value {
        let atoms: Vec<String> = facts.atoms.iter().map(|a| atom_string(a, names)).collect();
        let rows: Vec<serde_json::Value> = facts
            .rows
            .iter()
            .map(|r| {
                json!({
                    "schema": r.schema,
                    "terms": r.terms.iter().map(|(k, c)| json!([atoms[*k], c.to_string()])).collect::<Vec<_>>(),
                    "rhs": r.rhs.to_string(),
                })
            })
            .collect();
        let mults: Vec<serde_json::Value> = self
            .multipliers
            .iter()
            .map(|f| {
                let nz: Vec<serde_json::Value> = f
                    .iter()
                    .enumerate()
                    .filter(|(_, m)| !m.is_zero())
                    .map(|(i, m)| json!({"row": i, "value": m.to_string()}))
                    .collect();
                serde_json::Value::Array(nz)
            })
            .collect();
        json!({ "atoms": atoms, "facts": rows, "multipliers": mults })
    }

    /// Fact rows used with a nonzero multiplier.
    pub fn used_rows(&self) -> BTreeSet<usize> {
        self.multipliers
            .iter()
            .flat_map(|f| f.iter().enumerate().filter(|(_, m)| !m.is_zero()).map(|(i, _)| i))
            .collect()
    }
}

/// Known-coefficient mode: find a certificate for every goal, or `None` if
/// some goal does not follow from the facts.
pub fn farkas_entails(facts: &FactSystem, goals: &[Goal]) -> Option<FarkasCertificate> {
    let mut multipliers = Vec::with_capacity(goals.len());
    for g in goals {
        let mut lp = LinearProgram::new();
        let fs: Vec<VarId> = (0..facts.rows.len()).map(|i| lp.add_var(format!("f{i}"), true)).collect();
        let u: Vec<LinExpr> = g.u.iter().cloned().map(LinExpr::constant).collect();
        encode_rows(&mut lp, facts, &fs, &u, &LinExpr::constant(g.v.clone()), "");
        lp.set_objective(fs.iter().map(|&f| (f, Rat::one())));
        let out = ratlp::solve(&lp);
        if !out.is_optimal() {
            return None;
        }
        multipliers.push(fs.iter().map(|&f| out.assignment[f].clone()).collect());
    }
    Some(FarkasCertificate { multipliers })
}

fn encode_rows(lp: &mut LinearProgram, facts: &FactSystem, fs: &[VarId], u: &[LinExpr], v: &LinExpr, label: &str) {
    let mut cols: Vec<Vec<(VarId, Rat)>> = vec![Vec::new(); facts.atoms.len()];
    let mut fb = Vec::new();
    for (f, row) in fs.iter().zip(&facts.rows) {
        for (k, c) in &row.terms {
            cols[*k].push((*f, c.clone()));
        }
        if !row.rhs.is_zero() {
            fb.push((*f, row.rhs.clone()));
        }
    }
    // U_k − (F·A)_k ≤ 0 for every atom.
    for (k, col) in cols.into_iter().enumerate() {
        let fa = LinExpr { terms: ratlp::normalize_terms(col), constant: Rat::zero() };
        let e = u[k].sub(&fa);
        if e.terms.is_empty() && !e.constant.is_positive() {
            continue;
        }
        lp.constrain(&e, Rel::Le, (!label.is_empty()).then(|| format!("{label}.atom{k}")));
    }
    // F·b − v ≤ 0.
    let e = LinExpr { terms: ratlp::normalize_terms(fb), constant: Rat::zero() }.sub(v);
    if !(e.terms.is_empty() && !e.constant.is_positive()) {
        lp.constrain(&e, Rel::Le, (!label.is_empty()).then(|| format!("{label}.const")));
    }
}

/// Unknown-coefficient mode: add fresh multipliers and the rows
/// `U ≤ F·A`, `F·b ≤ v` to `lp`; returns the multiplier variables.
pub fn encode_entailment(
    lp: &mut LinearProgram,
    facts: &FactSystem,
    u: &[LinExpr],
    v: &LinExpr,
    label: &str,
) -> Vec<VarId> {
    assert_eq!(u.len(), facts.atoms.len());
    let fs: Vec<VarId> = (0..facts.rows.len()).map(|i| lp.add_var(format!("{label}.f{i}"), true)).collect();
    encode_rows(lp, facts, &fs, u, v, label);
    fs
}

/// Pointwise rank comparison: `lhs_i − rhs_i ≥ 0` for every slot.
pub fn check_rank_side(lhs: &[LinExpr], rhs: &[LinExpr]) -> Vec<LinExpr> {
    lhs.iter().zip(rhs).map(|(l, r)| l.sub(r)).collect()
}

/// Outcome of discharging a known obligation.
#[derive(Debug, Clone)]
pub struct Discharged {
    pub facts: FactSystem,
    pub goal: Goal,
    pub certificate: FarkasCertificate,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EntailError {
    #[error("rank coefficient of slot {0} would increase")]
    Rank(usize),
    #[error("obligation has unknown coefficients")]
    Symbolic,
    #[error("log potential does not follow from the facts")]
    NotEntailed,
}

/// Decide `Φ(lhs) ≥ Φ(rhs)` for two known annotations: ranks pointwise,
/// log parts by Farkas.
pub fn discharge(lhs: &Annotation, rhs: &Annotation, closure: &Closure, opts: &FactOptions) -> Result<Discharged, EntailError> {
    for (i, (l, r)) in lhs.rank.iter().zip(&rhs.rank).enumerate() {
        if l < r {
            return Err(EntailError::Rank(i));
        }
    }
    let ob = Obligation::from_annotations(lhs, rhs);
    let atoms = collect_atoms(&ob, closure);
    let facts = expert_facts(&atoms, opts);
    let u = ob
        .goal(&atoms)
        .into_iter()
        .map(|e| e.as_constant().cloned().ok_or(EntailError::Symbolic))
        .collect::<Result<Vec<_>, _>>()?;
    let goal = Goal { u, v: Rat::zero() };
    let certificate = farkas_entails(&facts, std::slice::from_ref(&goal)).ok_or(EntailError::NotEntailed)?;
    Ok(Discharged { facts, goal, certificate })
}

impl fmt::Display for PotentialAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialAtom::RankOf(i) => write!(f, "rk(x{})", i + 1),
            PotentialAtom::LogOf(idx) => write!(f, "{}", atom_string(idx, &[])),
        }
    }
}
