//! Annotations whose coefficients are linear expressions over LP unknowns,
//! attached to named tree variables.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::lang::Var;
use crate::potential::{Annotation, IndexTemplate, LogIndex, Rat};
use crate::ratlp::{LinExpr, LinearProgram, VarId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymAnn {
    pub vars: Vec<Var>,
    pub rank: Vec<LinExpr>,
    pub log: BTreeMap<LogIndex, LinExpr>,
}

/// Constant atoms with a zero value carry no potential.
fn useful(idx: &LogIndex) -> bool {
    !idx.is_constant() || idx.b >= 2
}

impl SymAnn {
    pub fn zero(vars: Vec<Var>) -> Self {
        let rank = vec![LinExpr::zero(); vars.len()];
        SymAnn { vars, rank, log: BTreeMap::new() }
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn slot(&self, x: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == x)
    }

    /// Fresh nonnegative unknowns for every rank slot and template index.
    pub fn fresh(lp: &mut LinearProgram, vars: Vec<Var>, template: &IndexTemplate, prefix: &str, ranks: bool) -> Self {
        let mut q = SymAnn::zero(vars);
        if ranks {
            for i in 0..q.arity() {
                q.rank[i] = LinExpr::var(lp.add_var(format!("{prefix}.rk.{}", q.vars[i]), true));
            }
        }
        for idx in template.indices(q.arity()) {
            if useful(&idx) {
                let x = lp.add_var(format!("{prefix}.{idx}"), true);
                q.log.insert(idx, LinExpr::var(x));
            }
        }
        q
    }

    pub fn from_annotation(q: &Annotation, vars: Vec<Var>) -> Self {
        assert_eq!(q.arity(), vars.len());
        SymAnn {
            vars,
            rank: q.rank.iter().cloned().map(LinExpr::constant).collect(),
            log: q.logs().map(|(i, c)| (i.clone(), LinExpr::constant(c.clone()))).collect(),
        }
    }

    /// Evaluate under an LP assignment.
    pub fn eval(&self, x: &[Rat]) -> Annotation {
        let mut q = Annotation::zero(self.arity());
        for (i, r) in self.rank.iter().enumerate() {
            q.rank[i] = r.eval(x);
        }
        for (idx, e) in &self.log {
            let v = e.eval(x);
            if !v.is_zero() {
                q.add_log(idx.clone(), &v);
            }
        }
        q
    }

    pub fn log_coeff(&self, idx: &LogIndex) -> LinExpr {
        self.log.get(idx).cloned().unwrap_or_default()
    }

    pub fn add_log(&mut self, idx: LogIndex, e: &LinExpr) {
        if e.is_zero() {
            return;
        }
        let slot = self.log.entry(idx).or_default();
        *slot = slot.add(e);
        if slot.is_zero() {
            // Keep the map free of zero entries.
            let k = self.log.iter().find(|(_, v)| v.is_zero()).map(|(k, _)| k.clone());
            if let Some(k) = k {
                self.log.remove(&k);
            }
        }
    }

    /// `self + f·other` over the same variables.
    pub fn add_scaled(&self, f: &LinExprScale, other: &SymAnn) -> SymAnn {
        assert_eq!(self.vars, other.vars);
        let mut out = self.clone();
        for (i, r) in other.rank.iter().enumerate() {
            out.rank[i] = out.rank[i].add(&f.apply(r));
        }
        for (idx, e) in &other.log {
            out.add_log(idx.clone(), &f.apply(e));
        }
        out
    }

    /// `Q + K` on the constant `log 2` entry.
    pub fn add_constant(&self, k: &Rat) -> SymAnn {
        let mut q = self.clone();
        q.add_log(LogIndex::constant(self.arity(), 2), &LinExpr::constant(k.clone()));
        q
    }

    /// The same potential over a superset of variables (new slots are zero).
    pub fn extend_to(&self, vars: &[Var]) -> SymAnn {
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v).expect("extend_to: variable missing"))
            .collect();
        let mut out = SymAnn::zero(vars.to_vec());
        for (i, r) in self.rank.iter().enumerate() {
            out.rank[map[i]] = r.clone();
        }
        for (idx, e) in &self.log {
            let mut a = vec![0; vars.len()];
            for (i, &x) in idx.a.iter().enumerate() {
                a[map[i]] = x;
            }
            out.add_log(LogIndex::new(a, idx.b), e);
        }
        out
    }

    /// Drop the slots not in `keep` together with every entry that mentions
    /// them. Sound because dropped coefficients are nonnegative.
    pub fn restrict(&self, keep: &[Var]) -> SymAnn {
        let slots: Vec<usize> = keep.iter().map(|v| self.slot(v).expect("restrict: variable missing")).collect();
        let mut out = SymAnn::zero(keep.to_vec());
        for (k, &i) in slots.iter().enumerate() {
            out.rank[k] = self.rank[i].clone();
        }
        for (idx, e) in &self.log {
            let outside = idx.a.iter().enumerate().any(|(i, &x)| x != 0 && !slots.contains(&i));
            if !outside {
                out.add_log(LogIndex::new(slots.iter().map(|&i| idx.a[i]).collect(), idx.b), e);
            }
        }
        out
    }

    /// Rename the slots positionally.
    pub fn rename(mut self, vars: Vec<Var>) -> SymAnn {
        assert_eq!(vars.len(), self.vars.len());
        self.vars = vars;
        self
    }

    /// Merge slot `j` into slot `i` and drop `j`.
    pub fn share(&self, i: usize, j: usize) -> SymAnn {
        let mut vars = self.vars.clone();
        vars.remove(j);
        let mut rank = self.rank.clone();
        rank[i] = rank[i].add(&rank[j]);
        rank.remove(j);
        let mut out = SymAnn { vars, rank, log: BTreeMap::new() };
        for (idx, e) in &self.log {
            let mut a = idx.a.clone();
            a[i] += a[j];
            a.remove(j);
            out.add_log(LogIndex::new(a, idx.b), e);
        }
        out
    }

    pub fn unknowns(&self) -> Vec<VarId> {
        let mut out: Vec<VarId> =
            self.rank.iter().chain(self.log.values()).flat_map(|e| e.terms.iter().map(|(x, _)| *x)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// A scalar that is either a known rational or an LP unknown (for conic
/// and convex combinations of known annotations).
#[derive(Debug, Clone)]
pub enum LinExprScale {
    Known(Rat),
    Unknown(VarId),
}

impl LinExprScale {
    pub fn one() -> Self {
        LinExprScale::Known(Rat::one())
    }

    fn apply(&self, e: &LinExpr) -> LinExpr {
        match self {
            LinExprScale::Known(c) => e.scale(c),
            LinExprScale::Unknown(x) => {
                let c = e.as_constant().expect("an unknown multiplier needs a known annotation");
                LinExpr::zero().add_scaled(c, &LinExpr::var(*x))
            }
        }
    }
}

impl fmt::Display for SymAnn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] rank: {} entries; log: {} entries", self.vars.join(", "), self.rank.len(), self.log.len())
    }
}
