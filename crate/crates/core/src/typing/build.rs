//! Constraint generation: walks a function body and emits the linear
//! constraints of a typing derivation into one linear program.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_traits::{One, Signed};

use super::ann::{LinExprScale, SymAnn};
use super::prep::substitute;
use super::TypingOptions;
use crate::entail::{collect_atoms, encode_entailment, expert_facts, Closure, FactOptions, FactSystem, Obligation};
use crate::lang::{Expr, FunDef, Program, SimpleType, Var};
use crate::potential::{Annotation, LogIndex, Rat};
use crate::ratlp::{LinExpr, LinearProgram, Rel};
use crate::Mode;

/// Name of the result slot in result annotations.
pub const RESULT: &str = "*";

/// Costed annotation pairs a call site may use.
#[derive(Debug, Clone)]
pub enum CostedTable {
    /// Known pairs; a call uses a convex combination.
    Known(Vec<(Annotation, Annotation)>),
    /// One pair of unknowns, shared by every call (inference).
    Unknown(SymAnn, SymAnn),
}

#[derive(Debug, Clone, Default)]
pub struct Tables {
    pub costed: BTreeMap<String, CostedTable>,
    /// Cost-free pairs; a call uses a conic combination.
    pub cost_free: BTreeMap<String, Vec<(Annotation, Annotation)>>,
}

/// An annotation recorded at a point of the derivation.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub path: Vec<String>,
    pub kind: &'static str,
    pub ann: SymAnn,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct BuildStats {
    pub weak_steps: usize,
    pub share_steps: usize,
    pub let_steps: usize,
    pub cost_free_premises: usize,
    /// Cost-free premises forced to zero by the nesting cap.
    pub capped_premises: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("no signature for `{0}`")]
    MissingSignature(String),
    #[error("`{0}` is not defined")]
    UndefinedFunction(String),
    #[error("`{0}` has no type")]
    Untyped(String),
    #[error("tree variable `{0}` is not in the typing context")]
    NotInContext(String),
}

pub struct Builder<'a> {
    pub lp: LinearProgram,
    prog: &'a Program,
    opts: &'a TypingOptions,
    tables: &'a Tables,
    facts: FactOptions,
    fact_cache: HashMap<Vec<LogIndex>, FactSystem>,
    tys: HashMap<Var, SimpleType>,
    path: Vec<String>,
    counter: usize,
    // Variables bound to `leaf` by a let.
    leaves: HashSet<Var>,
    pub snapshots: Vec<Snapshot>,
    pub stats: BuildStats,
}

fn tree_param_names(f: &FunDef) -> Result<Vec<Var>, BuildError> {
    let ty = f.ty.as_ref().ok_or_else(|| BuildError::Untyped(f.name.clone()))?;
    Ok(f.params.iter().zip(&ty.params).filter(|(_, t)| t.is_tree()).map(|(x, _)| x.clone()).collect())
}

pub fn result_vars(ty: &SimpleType) -> Vec<Var> {
    if ty.is_tree() {
        vec![RESULT.to_string()]
    } else {
        Vec::new()
    }
}

impl<'a> Builder<'a> {
    pub fn new(prog: &'a Program, opts: &'a TypingOptions, tables: &'a Tables, lp: LinearProgram) -> Self {
        Builder {
            lp,
            prog,
            opts,
            tables,
            facts: FactOptions { disjoint_log_sums: true, nonnegativity: false },
            fact_cache: HashMap::new(),
            tys: HashMap::new(),
            path: Vec::new(),
            counter: 0,
            leaves: HashSet::new(),
            snapshots: Vec::new(),
            stats: BuildStats::default(),
        }
    }

    fn label(&mut self, what: &str) -> String {
        self.counter += 1;
        format!("{}{what}{}", self.path.first().map(|f| format!("{f}.")).unwrap_or_default(), self.counter)
    }

    fn snapshot(&mut self, kind: &'static str, ann: &SymAnn) {
        if self.opts.record_snapshots {
            self.snapshots.push(Snapshot { path: self.path.clone(), kind, ann: ann.clone() });
        }
    }

    fn is_tree(&self, x: &str) -> bool {
        self.tys.get(x).is_some_and(SimpleType::is_tree)
    }

    fn tree_fv(&self, e: &Expr) -> BTreeSet<Var> {
        e.free_vars().into_iter().filter(|x| self.is_tree(x)).collect()
    }

    /// Derive the body of `f` against `(q, q1)`; `q` is over the tree
    /// parameters in order, `q1` over the result.
    pub fn function(&mut self, f: &FunDef, q: &SymAnn, q1: &SymAnn, mode: Mode) -> Result<(), BuildError> {
        let ty = f.ty.as_ref().ok_or_else(|| BuildError::Untyped(f.name.clone()))?;
        for (x, t) in f.params.iter().zip(&ty.params) {
            self.tys.insert(x.clone(), t.clone());
        }
        let params = tree_param_names(f)?;
        let body = super::prep::prepare(&f.params, &f.body);
        let ctx = q.clone().rename(params);
        self.path = vec![f.name.clone()];
        self.snapshot("entry", &ctx);
        self.expr(&body, ctx, q1, mode, 0)
    }

    fn type_of(&mut self, e: &Expr) -> Result<SimpleType, BuildError> {
        Ok(match e {
            Expr::Bool(_) | Expr::Cmp(..) => SimpleType::Bool,
            Expr::Leaf | Expr::Node(..) => SimpleType::Tree,
            Expr::Var(x) => self.tys.get(x).cloned().unwrap_or(SimpleType::Base),
            Expr::If(_, t, _) => self.type_of(t)?,
            Expr::Let(x, e1, e2) => {
                let t = self.type_of(e1)?;
                self.tys.insert(x.clone(), t);
                self.type_of(e2)?
            }
            Expr::App(f, _) => {
                let d = self.prog.get(f).ok_or_else(|| BuildError::UndefinedFunction(f.clone()))?;
                d.ty.as_ref().ok_or_else(|| BuildError::Untyped(f.clone()))?.result.clone()
            }
            Expr::Match { leaf, .. } => self.type_of(leaf)?,
        })
    }

    /// `Φ(from) ≥ Φ(to)`, where the variables of `to` are among those of
    /// `from`: ranks pointwise, logs through facts and Farkas multipliers.
    pub fn weaken(&mut self, from: &SymAnn, to: &SymAnn) -> Result<(), BuildError> {
        for v in &to.vars {
            if from.slot(v).is_none() {
                return Err(BuildError::NotInContext(v.clone()));
            }
        }
        self.stats.weak_steps += 1;
        let to = to.extend_to(&from.vars);
        let (from, to) = if from.vars.iter().any(|v| self.leaves.contains(v)) {
            (self.fold_leaves(from), self.fold_leaves(&to))
        } else {
            (from.clone(), to)
        };
        let label = self.label("weak");
        for (i, (l, r)) in from.rank.iter().zip(&to.rank).enumerate() {
            let e = l.sub(r);
            if e.as_constant().is_some_and(|c| !c.is_negative()) {
                continue;
            }
            self.lp.constrain(&e, Rel::Ge, Some(format!("{label}.rk{i}")));
        }
        let ob = Obligation { arity: from.arity(), lhs: from.log.clone(), rhs: to.log.clone() };
        let atoms = collect_atoms(&ob, &Closure::None);
        let goal = ob.goal(&atoms);
        if goal.iter().all(|u| u.as_constant().is_some_and(|c| !c.is_positive())) {
            return Ok(());
        }
        let facts = match self.fact_cache.get(&atoms) {
            Some(f) => f.clone(),
            None => {
                let f = expert_facts(&atoms, &self.facts);
                self.fact_cache.insert(atoms.clone(), f.clone());
                f
            }
        };
        encode_entailment(&mut self.lp, &facts, &goal, &LinExpr::zero(), &label);
        Ok(())
    }

    /// Replace slots bound to `leaf` by their value: rank 0, size 1.
    fn fold_leaves(&self, q: &SymAnn) -> SymAnn {
        let keep: Vec<usize> = (0..q.arity()).filter(|&i| !self.leaves.contains(&q.vars[i])).collect();
        let mut out = SymAnn::zero(keep.iter().map(|&i| q.vars[i].clone()).collect());
        for (k, &i) in keep.iter().enumerate() {
            out.rank[k] = q.rank[i].clone();
        }
        for (idx, e) in &q.log {
            let shift: u32 = (0..q.arity()).filter(|i| !keep.contains(i)).map(|i| idx.a[i]).sum();
            out.add_log(LogIndex::new(keep.iter().map(|&i| idx.a[i]).collect(), idx.b + shift), e);
        }
        out
    }

    fn fresh_name(&mut self, x: &str) -> Var {
        self.counter += 1;
        format!("{x}#{}", self.counter)
    }

    /// Split the potential of `z` between two fresh copies; returns the new
    /// context and the copies' names.
    fn share_split(&mut self, q: &SymAnn, z: &str) -> (SymAnn, Var, Var) {
        self.stats.share_steps += 1;
        let (z1, z2) = (self.fresh_name(z), self.fresh_name(z));
        let k = q.slot(z).expect("shared variable in context");
        let mut vars: Vec<Var> = q.vars.iter().filter(|v| *v != z).cloned().collect();
        vars.push(z1.clone());
        vars.push(z2.clone());
        let n = vars.len();
        let label = self.label("share");
        let mut out = SymAnn::zero(vars);
        let mut j = 0;
        for (i, r) in q.rank.iter().enumerate() {
            if i != k {
                out.rank[j] = r.clone();
                j += 1;
            }
        }
        let r1 = self.lp.add_var(format!("{label}.rk1"), true);
        let r2 = self.lp.add_var(format!("{label}.rk2"), true);
        out.rank[n - 2] = LinExpr::var(r1);
        out.rank[n - 1] = LinExpr::var(r2);
        self.lp.constrain(&q.rank[k].sub(&LinExpr::var(r1)).sub(&LinExpr::var(r2)), Rel::Eq, Some(label.clone()));
        let avals = self.opts.template.a_values.clone();
        for (idx, e) in &q.log {
            let mut rest: Vec<u32> = idx.a.clone();
            let az = rest.remove(k);
            let mut total = LinExpr::zero();
            for &a1 in &avals {
                let Some(a2) = az.checked_sub(a1) else { continue };
                if !avals.contains(&a2) && a2 != 0 {
                    continue;
                }
                let mut a = rest.clone();
                a.push(a1);
                a.push(a2);
                let entry = if az == 0 {
                    e.clone()
                } else {
                    LinExpr::var(self.lp.add_var(format!("{label}.{a1}/{a2}"), true))
                };
                total = total.add(&entry);
                out.add_log(LogIndex::new(a, idx.b), &entry);
            }
            if az != 0 {
                self.lp.constrain(&e.sub(&total), Rel::Eq, Some(format!("{label}.{idx}")));
            }
        }
        (out, z1, z2)
    }

    /// A requirement over `vars` that may repeat a variable: shares the
    /// repeated slots so that the result is over distinct variables.
    fn merge_repeats(need: SymAnn) -> SymAnn {
        let mut need = need;
        loop {
            let dup = (0..need.arity())
                .flat_map(|i| (i + 1..need.arity()).map(move |j| (i, j)))
                .find(|&(i, j)| need.vars[i] == need.vars[j]);
            match dup {
                Some((i, j)) => need = need.share(i, j),
                None => return need,
            }
        }
    }

    fn expr(&mut self, e: &Expr, q: SymAnn, out: &SymAnn, mode: Mode, depth: usize) -> Result<(), BuildError> {
        match e {
            Expr::Bool(_) | Expr::Cmp(..) => self.weaken(&q, out),
            Expr::Var(x) => {
                if self.is_tree(x) {
                    self.weaken(&q, &out.clone().rename(vec![x.clone()]))
                } else {
                    self.weaken(&q, out)
                }
            }
            Expr::Leaf => {
                let mut need = SymAnn::zero(Vec::new());
                for (idx, c) in &out.log {
                    need.add_log(LogIndex::new(Vec::new(), idx.a[0] + idx.b), c);
                }
                self.weaken(&q, &need)
            }
            Expr::Node(l, _, r) => {
                let rk = out.rank[0].clone();
                let mut need = SymAnn::zero(vec![l.clone(), r.clone()]);
                need.rank = vec![rk.clone(), rk.clone()];
                need.add_log(LogIndex::new(vec![1, 0], 0), &rk);
                need.add_log(LogIndex::new(vec![0, 1], 0), &rk);
                for (idx, c) in &out.log {
                    need.add_log(LogIndex::new(vec![idx.a[0], idx.a[0]], idx.b), c);
                }
                if l == r {
                    self.stats.share_steps += 1;
                }
                let need = Self::merge_repeats(need);
                self.weaken(&q, &need)
            }
            Expr::If(_, t, f) => {
                self.path.push("then".into());
                self.expr(t, q.clone(), out, mode, depth)?;
                self.path.pop();
                self.path.push("else".into());
                self.expr(f, q, out, mode, depth)?;
                self.path.pop();
                Ok(())
            }
            Expr::App(f, args) => self.app(f, args, &q, out, mode),
            Expr::Match { scrutinee: x, leaf, node, .. } => self.matching(x, leaf, node, q, out, mode, depth),
            Expr::Let(x, e1, e2) => self.let_in(x, e1, e2, q, out, mode, depth),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn matching(
        &mut self,
        x: &Var,
        leaf: &Expr,
        node: &crate::lang::NodeArm,
        q: SymAnn,
        out: &SymAnn,
        mode: Mode,
        depth: usize,
    ) -> Result<(), BuildError> {
        let k = q.slot(x).ok_or_else(|| BuildError::NotInContext(x.clone()))?;
        let others: Vec<Var> = q.vars.iter().filter(|v| *v != x).cloned().collect();

        self.path.push(format!("{x}:leaf"));
        if leaf.free_vars().contains(x) {
            self.expr(leaf, q.clone(), out, mode, depth)?;
        } else {
            let mut p = SymAnn::zero(others.clone());
            for (i, r) in q.rank.iter().enumerate() {
                if i != k {
                    let j = p.slot(&q.vars[i]).unwrap();
                    p.rank[j] = r.clone();
                }
            }
            for (idx, c) in &q.log {
                let mut a = idx.a.clone();
                let ax = a.remove(k);
                p.add_log(LogIndex::new(a, idx.b + ax), c);
            }
            self.snapshot("match-leaf", &p);
            self.expr(leaf, p, out, mode, depth)?;
        }
        self.path.pop();

        self.tys.insert(node.left.clone(), SimpleType::Tree);
        self.tys.insert(node.label.clone(), SimpleType::Base);
        self.tys.insert(node.right.clone(), SimpleType::Tree);
        self.path.push(format!("{x}:node"));
        if node.body.free_vars().contains(x) {
            self.expr(&node.body, q, out, mode, depth)?;
        } else {
            let mut vars = others;
            vars.push(node.left.clone());
            vars.push(node.right.clone());
            let n = vars.len();
            let mut r = SymAnn::zero(vars);
            let mut j = 0;
            for (i, c) in q.rank.iter().enumerate() {
                if i != k {
                    r.rank[j] = c.clone();
                    j += 1;
                }
            }
            r.rank[n - 2] = q.rank[k].clone();
            r.rank[n - 1] = q.rank[k].clone();
            for (idx, c) in &q.log {
                let mut a = idx.a.clone();
                let ax = a.remove(k);
                a.push(ax);
                a.push(ax);
                r.add_log(LogIndex::new(a, idx.b), c);
            }
            let mut unit = vec![0; n];
            unit[n - 2] = 1;
            r.add_log(LogIndex::new(unit.clone(), 0), &q.rank[k]);
            unit[n - 2] = 0;
            unit[n - 1] = 1;
            r.add_log(LogIndex::new(unit, 0), &q.rank[k]);
            self.snapshot("match-node", &r);
            self.expr(&node.body, r, out, mode, depth)?;
        }
        self.path.pop();
        Ok(())
    }

    fn app(&mut self, f: &str, args: &[Var], q: &SymAnn, out: &SymAnn, mode: Mode) -> Result<(), BuildError> {
        let def = self.prog.get(f).ok_or_else(|| BuildError::UndefinedFunction(f.to_string()))?;
        let ty = def.ty.clone().ok_or_else(|| BuildError::Untyped(f.to_string()))?;
        let tree_args: Vec<Var> =
            args.iter().zip(&ty.params).filter(|(_, t)| t.is_tree()).map(|(x, _)| x.clone()).collect();
        let pos: Vec<Var> = (0..tree_args.len()).map(|i| format!("#{i}")).collect();
        let res = result_vars(&ty.result);
        let label = self.label(&format!("app.{f}"));
        let (mut p, p1) = match mode {
            Mode::Costed => {
                let table = self.tables.costed.get(f).ok_or_else(|| BuildError::MissingSignature(f.to_string()))?;
                let (p, p1) = match table {
                    CostedTable::Unknown(p, p1) => (p.clone().rename(pos.clone()), p1.clone().rename(res.clone())),
                    CostedTable::Known(pairs) => {
                        self.combine(pairs, &pos, &res, &label, true).ok_or_else(|| BuildError::MissingSignature(f.to_string()))?
                    }
                };
                (p.add_constant(&Rat::one()), p1)
            }
            Mode::CostFree => {
                let pairs = self.tables.cost_free.get(f).cloned().unwrap_or_default();
                self.combine(&pairs, &pos, &res, &label, false).unwrap_or((SymAnn::zero(pos.clone()), SymAnn::zero(res.clone())))
            }
        };
        p = Self::merge_repeats(p.rename(tree_args));
        self.weaken(q, &p)?;
        self.weaken(&p1, out)
    }

    /// Convex (or conic) combination of known pairs with fresh multipliers.
    fn combine(
        &mut self,
        pairs: &[(Annotation, Annotation)],
        pos: &[Var],
        res: &[Var],
        label: &str,
        convex: bool,
    ) -> Option<(SymAnn, SymAnn)> {
        if pairs.is_empty() {
            return None;
        }
        let sym = |(a, b): &(Annotation, Annotation)| {
            (SymAnn::from_annotation(a, pos.to_vec()), SymAnn::from_annotation(b, res.to_vec()))
        };
        if pairs.len() == 1 && convex {
            return Some(sym(&pairs[0]));
        }
        let mut p = SymAnn::zero(pos.to_vec());
        let mut p1 = SymAnn::zero(res.to_vec());
        let mut sum = LinExpr::zero();
        for (j, pair) in pairs.iter().enumerate() {
            let l = self.lp.add_var(format!("{label}.lambda{j}"), true);
            sum = sum.add(&LinExpr::var(l));
            let (a, b) = sym(pair);
            p = p.add_scaled(&LinExprScale::Unknown(l), &a);
            p1 = p1.add_scaled(&LinExprScale::Unknown(l), &b);
        }
        if convex {
            self.lp.constrain(&sum.add_const(&-Rat::one()), Rel::Eq, Some(format!("{label}.convex")));
        }
        Some((p, p1))
    }

    #[allow(clippy::too_many_arguments)]
    fn let_in(
        &mut self,
        x: &Var,
        e1: &Expr,
        e2: &Expr,
        q: SymAnn,
        out: &SymAnn,
        mode: Mode,
        depth: usize,
    ) -> Result<(), BuildError> {
        let a_ty = self.type_of(e1)?;
        self.tys.insert(x.clone(), a_ty.clone());
        let x_tree = a_ty.is_tree();
        let fv1 = self.tree_fv(e1);
        if fv1.is_empty() && !matches!(e1, Expr::App(..)) {
            // Nothing to split: `e1` is a constant, a comparison or `leaf`.
            let mut r = q;
            if matches!(e1, Expr::Leaf) {
                self.leaves.insert(x.clone());
            }
            if x_tree {
                let mut vars = r.vars.clone();
                vars.push(x.clone());
                r = r.extend_to(&vars);
            }
            return self.expr(e2, r, out, mode, depth);
        }
        self.stats.let_steps += 1;
        let mut e1 = e1.clone();
        let mut e2 = e2.clone();
        let mut q = q;
        let mut fv2 = self.tree_fv(&e2);
        fv2.remove(x);
        for z in fv1.intersection(&fv2).cloned().collect::<Vec<_>>() {
            let (q2, z1, z2) = self.share_split(&q, &z);
            for v in [&z1, &z2] {
                self.tys.insert(v.clone(), SimpleType::Tree);
            }
            q = q2;
            e1 = substitute(&e1, &z, &z1);
            e2 = substitute(&e2, &z, &z2);
        }
        let fv1 = self.tree_fv(&e1);
        let mut fv2 = self.tree_fv(&e2);
        fv2.remove(x);
        let gamma: Vec<Var> = q.vars.iter().filter(|v| fv1.contains(*v)).cloned().collect();
        let delta: Vec<Var> = q.vars.iter().filter(|v| fv2.contains(*v)).cloned().collect();
        let keep: Vec<Var> = q.vars.iter().filter(|v| fv1.contains(*v) || fv2.contains(*v)).cloned().collect();

        self.path.push(format!("let {x}"));
        let label = self.label("let");
        self.snapshot("let-pre", &q);
        let qt = SymAnn::fresh(&mut self.lp, keep.clone(), &self.opts.template, &label, true);
        self.weaken(&q, &qt)?;
        self.snapshot("let-weak", &qt);

        let gi: Vec<usize> = gamma.iter().map(|v| qt.slot(v).unwrap()).collect();
        let di: Vec<usize> = delta.iter().map(|v| qt.slot(v).unwrap()).collect();
        let res = result_vars(&a_ty);

        // Premise for e1 in the current mode.
        let mut p = SymAnn::zero(gamma.clone());
        for (j, &i) in gi.iter().enumerate() {
            p.rank[j] = qt.rank[i].clone();
        }
        let mut r_const: BTreeMap<u32, LinExpr> = BTreeMap::new();
        let mut families: BTreeMap<Vec<u32>, Vec<(Vec<u32>, u32, LinExpr)>> = BTreeMap::new();
        let mut r = SymAnn::zero(if x_tree {
            let mut v = delta.clone();
            v.push(x.clone());
            v
        } else {
            delta.clone()
        });
        for (j, &i) in di.iter().enumerate() {
            r.rank[j] = qt.rank[i].clone();
        }
        let lift = |b: &[u32], ax: Option<u32>| -> Vec<u32> {
            let mut v = b.to_vec();
            if let Some(a) = ax {
                v.push(a);
            }
            v
        };
        let xa = |a: u32| if x_tree { Some(a) } else { None };
        for (idx, c) in &qt.log {
            let av: Vec<u32> = gi.iter().map(|&i| idx.a[i]).collect();
            let bv: Vec<u32> = di.iter().map(|&i| idx.a[i]).collect();
            let a_zero = av.iter().all(|&v| v == 0);
            let b_zero = bv.iter().all(|&v| v == 0);
            match (a_zero, b_zero) {
                (true, true) => {
                    // The body's share `c − s` may be negative: the bound
                    // expression can use more constant potential than is
                    // present, to be repaid by a later weakening.
                    let s = LinExpr::var(self.lp.add_var(format!("{label}.split{}", idx.b), true));
                    p.add_log(LogIndex::new(av, idx.b), &s);
                    let e = r_const.entry(idx.b).or_default();
                    *e = e.add(&c.sub(&s));
                }
                (false, true) => p.add_log(LogIndex::new(av, idx.b), c),
                (true, false) => r.add_log(LogIndex::new(lift(&bv, xa(0)), idx.b), c),
                (false, false) => families.entry(bv).or_default().push((av, idx.b, c.clone())),
            }
        }
        for (b, c) in r_const {
            r.add_log(LogIndex::new(lift(&vec![0; delta.len()], xa(0)), b), &c);
        }

        let p1 = SymAnn::fresh(&mut self.lp, res.clone(), &self.opts.template, &format!("{label}.res"), true);
        self.path.push("bound".into());
        self.expr(&e1, p, &p1, mode, depth)?;
        self.path.pop();
        if x_tree {
            let k = r.arity() - 1;
            r.rank[k] = p1.rank[0].clone();
        }
        for (idx, c) in &p1.log {
            let ax = idx.a.first().copied();
            r.add_log(LogIndex::new(lift(&vec![0; delta.len()], ax), idx.b), c);
        }

        for (bv, entries) in families {
            let nonzero = bv.iter().filter(|&&v| v != 0).count();
            if depth + 1 > self.opts.cost_free_depth || nonzero > self.opts.max_shift_slots {
                self.stats.capped_premises += 1;
                for (_, _, c) in &entries {
                    self.lp.constrain(c, Rel::Eq, Some(format!("{label}.capped")));
                }
                continue;
            }
            self.stats.cost_free_premises += 1;
            let mut pb = SymAnn::zero(gamma.clone());
            for (av, b, c) in &entries {
                pb.add_log(LogIndex::new(av.clone(), *b), c);
            }
            let tag = bv.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            let pb1 = SymAnn::fresh(&mut self.lp, res.clone(), &self.opts.template, &format!("{label}.cf{tag}"), false);
            self.path.push(format!("cf({tag})"));
            self.snapshot("cf-premise", &pb);
            self.snapshot("cf-result", &pb1);
            self.expr(&e1, pb, &pb1, Mode::CostFree, depth + 1)?;
            self.path.pop();
            for (idx, c) in &pb1.log {
                let ax = idx.a.first().copied();
                r.add_log(LogIndex::new(lift(&bv, ax), idx.b), c);
            }
        }
        self.snapshot("let-body", &r);
        self.path.push("body".into());
        self.expr(&e2, r, out, mode, depth)?;
        self.path.pop();
        self.path.pop();
        Ok(())
    }
}
