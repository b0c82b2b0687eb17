//! Empirical checks of certified bounds: run a function on a corpus of
//! search trees and compare the measured cost with the potential drop.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::interp::{run_function, EvalError, EvalOptions};
use crate::lang::{FunDef, Program, SimpleType, Value};
use crate::potential::{Annotation, AnnotationError};
use crate::Mode;

pub const TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "generator", rename_all = "kebab-case")]
pub enum CorpusSpec {
    /// Every shape with at most `max_leaves` leaves, labelled 1, 2, ...
    Exhaustive { max_leaves: usize },
    Random { count: usize, max_leaves: usize, seed: u64 },
}

/// A tree together with the keys to query it with.
#[derive(Debug, Clone)]
pub struct Input {
    pub tree: Value,
    pub keys: Vec<i64>,
}

/// All tree shapes with exactly `n` internal nodes, in a fixed order.
pub fn shapes(n: usize) -> Vec<Value> {
    let mut table: Vec<Vec<Value>> = vec![vec![Value::Leaf]];
    for k in 1..=n {
        let mut out = Vec::new();
        for i in 0..k {
            for l in &table[i] {
                for r in &table[k - 1 - i] {
                    out.push(Value::node(l.clone(), 0, r.clone()));
                }
            }
        }
        table.push(out);
    }
    table.swap_remove(n)
}

/// Relabel so that the inorder sequence is `labels`.
pub fn label(t: &Value, labels: &mut impl Iterator<Item = BigInt>) -> Value {
    match t {
        Value::Node(l, _, r) => {
            let l = label(l, labels);
            let a = labels.next().expect("enough labels");
            Value::node(l, a, label(r, labels))
        }
        other => other.clone(),
    }
}

/// A random search tree with `n` internal nodes whose labels are distinct
/// keys drawn from `0..4n`.
pub fn random_bst(rng: &mut impl Rng, n: usize) -> Value {
    let mut keys: Vec<i64> = (0..(4 * n as i64).max(1)).collect();
    keys.shuffle(rng);
    keys.truncate(n);
    let mut t = Value::Leaf;
    for k in keys {
        t = bst_insert(&t, k);
    }
    t
}

fn bst_insert(t: &Value, k: i64) -> Value {
    match t {
        Value::Leaf => Value::node(Value::Leaf, k, Value::Leaf),
        Value::Node(l, a, r) => {
            if BigInt::from(k) < *a {
                Value::node(bst_insert(l, k), a.clone(), (**r).clone())
            } else {
                Value::node((**l).clone(), a.clone(), bst_insert(r, k))
            }
        }
        other => other.clone(),
    }
}

/// Keys that hit every label, fall between labels and lie beyond both ends.
fn probe_keys(t: &Value) -> Vec<i64> {
    let labels: Vec<i64> = t.inorder().iter().map(|a| a.try_into().expect("small labels")).collect();
    let (Some(&lo), Some(&hi)) = (labels.first(), labels.last()) else { return vec![0] };
    (lo - 1..=hi + 1).collect()
}

pub fn corpus(spec: &CorpusSpec) -> Vec<Input> {
    match *spec {
        CorpusSpec::Exhaustive { max_leaves } => {
            let keys: Vec<i64> = (0..=max_leaves as i64 + 1).collect();
            (0..max_leaves)
                .flat_map(|n| shapes(n).into_iter().map(move |s| (n, s)))
                .map(|(n, s)| Input { tree: label(&s, &mut (1..=n as i64).map(BigInt::from)), keys: keys.clone() })
                .collect()
        }
        CorpusSpec::Random { count, max_leaves, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let n = rng.gen_range(0..max_leaves.max(1));
                    let tree = random_bst(&mut rng, n);
                    let keys = probe_keys(&tree);
                    Input { tree, keys }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub arguments: Vec<String>,
    pub result: String,
    pub cost: u64,
    pub potential_before: f64,
    pub potential_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validation {
    pub function: String,
    pub mode: Mode,
    pub pair: usize,
    pub corpus_size: usize,
    pub runs: usize,
    pub min_slack: f64,
    pub max_slack: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Validation {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ValidationError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("`{0}` has no type")]
    Untyped(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
}

fn arguments(f: &FunDef, ty: &[SimpleType], tree: &Value, key: i64) -> Vec<Value> {
    debug_assert_eq!(f.params.len(), ty.len());
    ty.iter()
        .map(|t| match t {
            SimpleType::Tree => tree.clone(),
            SimpleType::Bool => Value::Bool(key % 2 == 0),
            _ => Value::base(key),
        })
        .collect()
}

struct Run {
    args: Vec<Value>,
    value: Value,
    cost: u64,
    before: f64,
    after: f64,
}

impl Run {
    fn slack(&self) -> f64 {
        self.before - self.after - self.cost as f64
    }
}

/// Check Φ(args; Q) − Φ(result; Q') ≥ cost on every input. The cost is that
/// of evaluating the body, i.e. the outer application is not counted.
pub fn validate(
    p: &Program,
    function: &str,
    pair: (usize, &Annotation, &Annotation),
    mode: Mode,
    inputs: &[Input],
    fuel: u64,
) -> Result<Validation, ValidationError> {
    let (index, q, q1) = pair;
    let f = p.get(function).ok_or_else(|| ValidationError::UnknownFunction(function.into()))?;
    let ty = f.ty.as_ref().ok_or_else(|| ValidationError::Untyped(function.into()))?;
    let opts = EvalOptions { mode, fuel, trace: false };
    // Keys only matter to functions that take one.
    let keyed = ty.params.iter().any(|t| !t.is_tree());
    let runs: Vec<Run> = inputs
        .par_iter()
        .flat_map_iter(|inp| {
            let keys = if keyed { &inp.keys[..] } else { &inp.keys[..inp.keys.len().min(1)] };
            keys.iter().map(move |&k| (inp, k))
        })
        .map(|(inp, k)| {
            let args = arguments(f, &ty.params, &inp.tree, k);
            let out = run_function(p, function, &args, opts)?;
            let trees: Vec<&Value> = args.iter().filter(|v| v.is_tree()).collect();
            let before = q.potential(&trees)?;
            let after = if out.value.is_tree() { q1.potential(&[&out.value])? } else { q1.potential(&[])? };
            let cost = match mode {
                Mode::Costed => out.cost - 1,
                Mode::CostFree => out.cost,
            };
            Ok(Run { args, value: out.value, cost, before, after })
        })
        .collect::<Result<_, ValidationError>>()?;
    let mut v = Validation {
        function: function.into(),
        mode,
        pair: index,
        corpus_size: inputs.len(),
        runs: runs.len(),
        min_slack: f64::INFINITY,
        max_slack: f64::NEG_INFINITY,
        witness: None,
    };
    for r in &runs {
        let s = r.slack();
        v.min_slack = v.min_slack.min(s);
        v.max_slack = v.max_slack.max(s);
        if s < -TOLERANCE && v.witness.is_none() {
            v.witness = Some(Witness {
                arguments: r.args.iter().map(|a| a.to_string()).collect(),
                result: r.value.to_string(),
                cost: r.cost,
                potential_before: r.before,
                potential_after: r.after,
            });
        }
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Telescoping {
    pub sequences: usize,
    pub length: usize,
    /// Largest value of total cost minus the summed bound.
    pub worst_excess: f64,
}

impl Telescoping {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.worst_excess <= tolerance
    }
}

/// Run sequences of `function` (of type `B * T -> T`) from random trees,
/// feeding each result to the next call. With a rank-only result annotation
/// whose rank equals the input rank, the per-call bounds telescope to
/// q·rk(t₀) plus the sum of the log parts of Φ(tᵢ; Q).
pub fn telescoping(
    p: &Program,
    function: &str,
    q: &Annotation,
    sequences: usize,
    length: usize,
    leaves: usize,
    seed: u64,
) -> Result<Telescoping, ValidationError> {
    let rank = crate::potential::to_f64(&q.rank[0]);
    let excess: Vec<f64> = (0..sequences)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let mut t = random_bst(&mut rng, leaves - 1);
            let hi = 4 * leaves as i64;
            let mut bound = rank * crate::potential::rank(&t);
            let mut total = 0u64;
            for _ in 0..length {
                let k = rng.gen_range(-1..=hi);
                bound += q.potential(&[&t])? - rank * crate::potential::rank(&t);
                let out = run_function(p, function, &[Value::base(k), t], EvalOptions::default())?;
                total += out.cost - 1;
                t = out.value;
            }
            Ok(total as f64 - bound)
        })
        .collect::<Result<_, ValidationError>>()?;
    Ok(Telescoping { sequences, length, worst_excess: excess.into_iter().fold(f64::NEG_INFINITY, f64::max) })
}
