//! Type-based amortised cost analysis: checking annotated signatures and
//! inferring them by linear programming.

mod ann;
mod build;
mod prep;

use std::collections::BTreeMap;

use num_traits::One;
use rayon::prelude::*;

pub use ann::{LinExprScale, SymAnn};
pub use build::{result_vars, BuildError, BuildStats, Builder, CostedTable, Snapshot, Tables, RESULT};
pub use prep::{prepare, substitute};

use crate::lang::{FunDef, Program};
use crate::potential::{AnnotatedSignature, Annotation, IndexTemplate, LogIndex, Rat};
use crate::ratlp::{self, LinearProgram, LpStatus, SolveStats, VarId};
use crate::Mode;

#[derive(Debug, Clone)]
pub struct TypingOptions {
    pub template: IndexTemplate,
    /// How deeply cost-free premises of `let` may nest.
    pub cost_free_depth: usize,
    /// Cost-free premises are generated for shifts with at most this many
    /// nonzero slots; larger shifts get zero potential.
    pub max_shift_slots: usize,
    /// Inference: require every argument rank coefficient to equal the
    /// result rank coefficient.
    pub rank_preserving: bool,
    pub record_snapshots: bool,
}

impl Default for TypingOptions {
    fn default() -> Self {
        TypingOptions {
            template: IndexTemplate::default(),
            cost_free_depth: 2,
            max_shift_slots: 2,
            rank_preserving: true,
            record_snapshots: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypingError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("signature for `{0}` does not match a function of the program")]
    UnknownFunction(String),
    #[error("signature for `{name}` has type `{found}`, the program says `{expected}`")]
    TypeMismatch { name: String, expected: String, found: String },
}

/// Verdict for one annotation pair of one function.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PairVerdict {
    pub function: String,
    pub mode: Mode,
    pub index: usize,
    pub typable: bool,
    pub constraints: usize,
    pub variables: usize,
    pub pivots: usize,
    pub build: BuildStats,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub verdicts: Vec<PairVerdict>,
    /// Cost-free pairs used at call sites (given or computed).
    pub cost_free: BTreeMap<String, Vec<(Annotation, Annotation)>>,
}

impl CheckReport {
    pub fn typable(&self) -> bool {
        self.verdicts.iter().all(|v| v.typable)
    }
}

/// A derivation as a linear program, before solving.
pub struct Derivation {
    pub lp: LinearProgram,
    pub snapshots: Vec<Snapshot>,
    pub stats: BuildStats,
}

fn def<'p>(p: &'p Program, name: &str) -> Result<&'p FunDef, TypingError> {
    p.get(name).ok_or_else(|| TypingError::UnknownFunction(name.to_string()))
}

fn positional(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("#{i}")).collect()
}

/// Build the constraints of one derivation of `f` against a known pair.
pub fn derive_pair(
    p: &Program,
    tables: &Tables,
    f: &str,
    pair: &(Annotation, Annotation),
    mode: Mode,
    opts: &TypingOptions,
) -> Result<Derivation, TypingError> {
    let d = def(p, f)?;
    let ty = d.ty.as_ref().ok_or_else(|| BuildError::Untyped(f.to_string()))?;
    let q = SymAnn::from_annotation(&pair.0, positional(pair.0.arity()));
    let q1 = SymAnn::from_annotation(&pair.1, result_vars(&ty.result));
    let mut b = Builder::new(p, opts, tables, LinearProgram::new());
    b.function(d, &q, &q1, mode)?;
    Ok(Derivation { lp: b.lp, snapshots: b.snapshots, stats: b.stats })
}

fn verdict(p: &Program, tables: &Tables, f: &str, pair: &(Annotation, Annotation), mode: Mode, index: usize, opts: &TypingOptions) -> Result<PairVerdict, TypingError> {
    let d = derive_pair(p, tables, f, pair, mode, opts)?;
    let out = ratlp::solve(&d.lp);
    Ok(PairVerdict {
        function: f.to_string(),
        mode,
        index,
        typable: out.status == LpStatus::Optimal,
        constraints: d.lp.rows().len(),
        variables: d.lp.num_vars(),
        pivots: out.stats.pivots,
        build: d.stats,
    })
}

fn check_types(p: &Program, sigs: &[AnnotatedSignature]) -> Result<(), TypingError> {
    for s in sigs {
        let d = def(p, &s.name)?;
        let ty = d.ty.as_ref().ok_or_else(|| BuildError::Untyped(s.name.clone()))?;
        if *ty != s.ty {
            return Err(TypingError::TypeMismatch {
                name: s.name.clone(),
                expected: ty.to_string(),
                found: s.ty.to_string(),
            });
        }
    }
    Ok(())
}

/// Candidate cost-free pairs `log(a·|args| + c) → log(|result| + c')` with
/// `c' ≤ c`, one coefficient each.
fn cost_free_candidates(d: &FunDef, template: &IndexTemplate) -> Vec<(Annotation, Annotation)> {
    let Some(ty) = &d.ty else { return Vec::new() };
    let m = ty.params.iter().filter(|t| t.is_tree()).count();
    if m == 0 || !ty.result.is_tree() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let ones: Vec<LogIndex> = IndexTemplate { a_values: vec![0, 1], b_values: vec![0] }.indices(m);
    for a in ones.iter().filter(|i| !i.is_constant()) {
        for &c in &template.b_values {
            for &c1 in template.b_values.iter().filter(|&&c1| c1 <= c) {
                let q = Annotation::zero(m).with_log(&a.a, c, Rat::one());
                let q1 = Annotation::zero(1).with_log(&[1], c1, Rat::one());
                out.push((q, q1));
            }
        }
    }
    out
}

/// Greatest set of candidate cost-free pairs that type check when calls use
/// conic combinations of the set itself. Functions listed in `given` keep
/// their pairs unchecked.
pub fn cost_free_table(
    p: &Program,
    given: &BTreeMap<String, Vec<(Annotation, Annotation)>>,
    opts: &TypingOptions,
) -> Result<BTreeMap<String, Vec<(Annotation, Annotation)>>, TypingError> {
    let mut table = given.clone();
    for d in &p.defs {
        if !given.contains_key(&d.name) {
            table.insert(d.name.clone(), cost_free_candidates(d, &opts.template));
        }
    }
    loop {
        let tables = Tables { costed: BTreeMap::new(), cost_free: table.clone() };
        let jobs: Vec<(String, usize)> = table
            .iter()
            .filter(|(f, _)| !given.contains_key(*f))
            .flat_map(|(f, pairs)| (0..pairs.len()).map(move |i| (f.clone(), i)))
            .collect();
        let results: Vec<Result<bool, TypingError>> = jobs
            .par_iter()
            .map(|(f, i)| {
                let d = derive_pair(p, &tables, f, &table[f][*i], Mode::CostFree, opts)?;
                Ok(ratlp::solve(&d.lp).status == LpStatus::Optimal)
            })
            .collect();
        let mut changed = false;
        let mut next = table.clone();
        for ((f, i), ok) in jobs.iter().zip(results).rev() {
            if !ok? {
                next.get_mut(f).unwrap().remove(*i);
                changed = true;
            }
        }
        table = next;
        if !changed {
            return Ok(table);
        }
    }
}

/// Check every pair of every signature.
pub fn check_program(p: &Program, sigs: &[AnnotatedSignature], opts: &TypingOptions) -> Result<CheckReport, TypingError> {
    check_types(p, sigs)?;
    let given: BTreeMap<String, Vec<(Annotation, Annotation)>> = sigs
        .iter()
        .filter(|s| !s.cost_free.is_empty())
        .map(|s| (s.name.clone(), s.cost_free.clone()))
        .collect();
    let cost_free = cost_free_table(p, &given, opts)?;
    let tables = Tables {
        costed: sigs.iter().map(|s| (s.name.clone(), CostedTable::Known(s.costed.clone()))).collect(),
        cost_free: cost_free.clone(),
    };
    let mut jobs = Vec::new();
    for s in sigs {
        for (i, pair) in s.costed.iter().enumerate() {
            jobs.push((s.name.as_str(), pair, Mode::Costed, i));
        }
        for (i, pair) in s.cost_free.iter().enumerate() {
            jobs.push((s.name.as_str(), pair, Mode::CostFree, i));
        }
    }
    let verdicts = jobs
        .par_iter()
        .map(|(f, pair, mode, i)| verdict(p, &tables, f, pair, *mode, *i, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CheckReport { verdicts, cost_free })
}

#[derive(Debug, Clone)]
pub struct InferReport {
    /// `None` if no annotation within the template types the program.
    pub signatures: Option<Vec<AnnotatedSignature>>,
    pub constraints: usize,
    pub variables: usize,
    pub pivots: usize,
    pub build: BuildStats,
}

/// Infer one costed pair per function (jointly), minimising the input
/// coefficients and then maximising the result coefficients.
pub fn infer_program(p: &Program, opts: &TypingOptions) -> Result<InferReport, TypingError> {
    let cost_free = cost_free_table(p, &BTreeMap::new(), opts)?;
    let mut lp = LinearProgram::new();
    let mut costed = BTreeMap::new();
    let mut input_vars: Vec<VarId> = Vec::new();
    let mut result_vars_all: Vec<VarId> = Vec::new();
    for d in &p.defs {
        let ty = d.ty.as_ref().ok_or_else(|| BuildError::Untyped(d.name.clone()))?;
        let m = ty.params.iter().filter(|t| t.is_tree()).count();
        let q = SymAnn::fresh(&mut lp, positional(m), &opts.template, &format!("{}.Q", d.name), true);
        let q1 = SymAnn::fresh(&mut lp, result_vars(&ty.result), &opts.template, &format!("{}.Q'", d.name), true);
        if opts.rank_preserving && ty.result.is_tree() {
            for r in &q.rank {
                lp.constrain(&r.sub(&q1.rank[0]), ratlp::Rel::Eq, Some(format!("{}.rank-preserving", d.name)));
            }
        }
        input_vars.extend(q.unknowns());
        result_vars_all.extend(q1.unknowns());
        costed.insert(d.name.clone(), CostedTable::Unknown(q, q1));
    }
    let tables = Tables { costed, cost_free: cost_free.clone() };
    let mut b = Builder::new(p, opts, &tables, lp);
    for d in &p.defs {
        let CostedTable::Unknown(q, q1) = &tables.costed[&d.name] else { unreachable!() };
        b.function(d, q, q1, Mode::Costed)?;
    }
    let stats = b.stats;
    let mut lp = b.lp;
    lp.set_objective(input_vars.iter().map(|&x| (x, Rat::one())));
    lp.push_objective(result_vars_all.iter().map(|&x| (x, -Rat::one())));
    let mut out = ratlp::solve(&lp);
    if out.status == LpStatus::Unbounded {
        lp.set_objective(input_vars.iter().map(|&x| (x, Rat::one())));
        out = ratlp::solve(&lp);
    }
    let signatures = (out.status == LpStatus::Optimal).then(|| {
        p.defs
            .iter()
            .map(|d| {
                let CostedTable::Unknown(q, q1) = &tables.costed[&d.name] else { unreachable!() };
                let mut s = AnnotatedSignature::new(d.name.clone(), d.ty.clone().unwrap());
                s.costed.push((q.eval(&out.assignment), q1.eval(&out.assignment)));
                s.cost_free = cost_free.get(&d.name).cloned().unwrap_or_default();
                s
            })
            .collect()
    });
    Ok(InferReport {
        signatures,
        constraints: lp.rows().len(),
        variables: lp.num_vars(),
        pivots: out.stats.pivots,
        build: stats,
    })
}

/// Solve a derivation LP for feasibility and return the assignment.
pub fn solve_derivation(d: &Derivation) -> (LpStatus, Vec<Rat>, SolveStats) {
    let out = ratlp::solve(&d.lp);
    (out.status, out.assignment, out.stats)
}
