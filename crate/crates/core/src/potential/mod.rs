//! Rank, logarithmic basic potentials and resource annotations.

mod signature;
mod text;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::lang::Value;

pub use signature::{parse_signatures, print_signatures, AnnotatedSignature, SignatureError};
pub use text::{parse_annotation, AnnotationParseError};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

pub fn to_f64(q: &Rat) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `log2(max(n, 1))`.
pub fn log2p(n: f64) -> f64 {
    n.max(1.0).log2()
}

/// Index of a basic potential `log(a1*|t1| + ... + am*|tm| + b)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LogIndex {
    pub a: Vec<u32>,
    pub b: u32,
}

impl LogIndex {
    pub fn new(a: Vec<u32>, b: u32) -> Self {
        LogIndex { a, b }
    }

    pub fn constant(arity: usize, b: u32) -> Self {
        LogIndex { a: vec![0; arity], b }
    }

    pub fn is_constant(&self) -> bool {
        self.a.iter().all(|&x| x == 0)
    }

    pub fn eval(&self, sizes: &[u64]) -> f64 {
        let s: f64 = self.a.iter().zip(sizes).map(|(&a, &n)| a as f64 * n as f64).sum();
        log2p(s + self.b as f64)
    }
}

impl fmt::Display for LogIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.a.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "|{})", self.b)
    }
}

/// Nonnegative rational coefficients: one rank coefficient per tree slot and
/// finitely many log coefficients. Zero entries are not stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Annotation {
    pub rank: Vec<Rat>,
    log: BTreeMap<LogIndex, Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnnotationError {
    #[error("annotation has arity {expected}, given {found} trees")]
    Arity { expected: usize, found: usize },
    #[error("slot {0} out of range")]
    Slot(usize),
    #[error("{0}")]
    Shape(String),
}

impl Annotation {
    pub fn zero(arity: usize) -> Self {
        Annotation { rank: vec![Rat::zero(); arity], log: BTreeMap::new() }
    }

    pub fn arity(&self) -> usize {
        self.rank.len()
    }

    pub fn with_rank(mut self, slot: usize, q: Rat) -> Self {
        self.rank[slot] = q;
        self
    }

    pub fn with_log(mut self, a: &[u32], b: u32, q: Rat) -> Self {
        self.set_log(LogIndex::new(a.to_vec(), b), q);
        self
    }

    pub fn log_coeff(&self, idx: &LogIndex) -> Rat {
        self.log.get(idx).cloned().unwrap_or_else(Rat::zero)
    }

    /// Set a log coefficient; panics on a wrong-length index.
    pub fn set_log(&mut self, idx: LogIndex, q: Rat) {
        assert_eq!(idx.a.len(), self.arity(), "log index length must equal arity");
        if q.is_zero() {
            self.log.remove(&idx);
        } else {
            self.log.insert(idx, q);
        }
    }

    pub fn add_log(&mut self, idx: LogIndex, q: &Rat) {
        let cur = self.log_coeff(&idx);
        self.set_log(idx, cur + q);
    }

    /// Nonzero log coefficients in index order.
    pub fn logs(&self) -> impl Iterator<Item = (&LogIndex, &Rat)> {
        self.log.iter()
    }

    pub fn is_nonnegative(&self) -> bool {
        let neg = |q: &Rat| *q < Rat::zero();
        !self.rank.iter().any(neg) && !self.log.values().any(neg)
    }

    pub fn is_zero(&self) -> bool {
        self.rank.iter().all(Zero::is_zero) && self.log.is_empty()
    }

    /// The annotation `Q + K`: adds `K` to the coefficient of `log(0 + 2)`.
    pub fn add_constant(&self, k: &Rat) -> Annotation {
        let mut q = self.clone();
        q.add_log(LogIndex::constant(self.arity(), 2), k);
        q
    }

    /// Merge slot `j` into slot `i` (the result drops slot `j`), so that
    /// `Φ(.., u, .., u, ..; Q) = Φ(.., u, ..; share(Q))`.
    pub fn share(&self, i: usize, j: usize) -> Result<Annotation, AnnotationError> {
        let m = self.arity();
        if i >= m {
            return Err(AnnotationError::Slot(i));
        }
        if j >= m || i == j {
            return Err(AnnotationError::Slot(j));
        }
        let mut rank = self.rank.clone();
        rank[i] = &rank[i] + &rank[j];
        rank.remove(j);
        let mut out = Annotation { rank, log: BTreeMap::new() };
        for (idx, q) in &self.log {
            let mut a = idx.a.clone();
            a[i] += a[j];
            a.remove(j);
            out.add_log(LogIndex::new(a, idx.b), q);
        }
        Ok(out)
    }

    /// Φ(trees; Q) in floating point.
    pub fn potential(&self, trees: &[&Value]) -> Result<f64, AnnotationError> {
        if trees.len() != self.arity() {
            return Err(AnnotationError::Arity { expected: self.arity(), found: trees.len() });
        }
        let mut sizes = Vec::with_capacity(trees.len());
        let mut total = 0.0;
        for (q, t) in self.rank.iter().zip(trees) {
            let Some(n) = t.size() else {
                return Err(AnnotationError::Shape(format!("{t} is not a tree")));
            };
            sizes.push(n);
            if !q.is_zero() {
                total += to_f64(q) * rank(t);
            }
        }
        for (idx, q) in &self.log {
            total += to_f64(q) * idx.eval(&sizes);
        }
        Ok(total)
    }

    /// The log part of Φ evaluated on raw sizes (ranks ignored).
    pub fn log_potential(&self, sizes: &[u64]) -> f64 {
        self.log.iter().map(|(idx, q)| to_f64(q) * idx.eval(sizes)).sum()
    }
}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rank: [")?;
        for (i, q) in self.rank.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{q}")?;
        }
        write!(f, "]; log: {{")?;
        for (i, (idx, q)) in self.log.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{idx}: {q}")?;
        }
        write!(f, "}}")
    }
}

/// rk(nil) = 0, rk(<t, a, u>) = rk(t) + log'|t| + log'|u| + rk(u).
pub fn rank(t: &Value) -> f64 {
    fn go(t: &Value) -> (f64, u64) {
        match t {
            Value::Node(l, _, r) => {
                let (rl, nl) = go(l);
                let (rr, nr) = go(r);
                (rl + rr + log2p(nl as f64) + log2p(nr as f64), nl + nr)
            }
            _ => (0.0, 1),
        }
    }
    go(t).0
}

/// Which log indices an annotation may use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexTemplate {
    pub a_values: Vec<u32>,
    pub b_values: Vec<u32>,
}

impl Default for IndexTemplate {
    fn default() -> Self {
        IndexTemplate { a_values: vec![0, 1], b_values: vec![0, 1, 2] }
    }
}

impl IndexTemplate {
    pub fn new(mut a_values: Vec<u32>, mut b_values: Vec<u32>) -> Result<Self, String> {
        a_values.sort_unstable();
        a_values.dedup();
        b_values.sort_unstable();
        b_values.dedup();
        if !a_values.contains(&0) {
            return Err("a-values must include 0".into());
        }
        if !b_values.contains(&2) {
            return Err("b-values must include 2 so that constants are expressible".into());
        }
        Ok(IndexTemplate { a_values, b_values })
    }

    /// Parse `a=0..1,b=0..2` (ranges or comma-free single values).
    pub fn parse(s: &str) -> Result<Self, String> {
        let mut a = None;
        let mut b = None;
        for part in s.split(',') {
            let (key, range) = part.split_once('=').ok_or_else(|| format!("expected key=range in `{part}`"))?;
            let (lo, hi) = match range.split_once("..") {
                Some((lo, hi)) => (lo, hi),
                None => (range, range),
            };
            let lo: u32 = lo.trim().parse().map_err(|_| format!("bad bound `{lo}`"))?;
            let hi: u32 = hi.trim().parse().map_err(|_| format!("bad bound `{hi}`"))?;
            if lo > hi || hi > 64 {
                return Err(format!("bad range `{range}`"));
            }
            let vals: Vec<u32> = (lo..=hi).collect();
            match key.trim() {
                "a" => a = Some(vals),
                "b" => b = Some(vals),
                k => return Err(format!("unknown template key `{k}`")),
            }
        }
        let d = IndexTemplate::default();
        IndexTemplate::new(a.map_or(d.a_values.clone(), |mut v| {
            v.push(0);
            v
        }), b.unwrap_or(d.b_values))
    }

    pub fn max_b(&self) -> u32 {
        *self.b_values.last().unwrap_or(&0)
    }

    /// Every log index of the given arity allowed by the template.
    pub fn indices(&self, arity: usize) -> Vec<LogIndex> {
        let mut vecs: Vec<Vec<u32>> = vec![Vec::new()];
        for _ in 0..arity {
            vecs = vecs
                .into_iter()
                .flat_map(|v| {
                    self.a_values.iter().map(move |&x| {
                        let mut w = v.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
        let mut out = Vec::new();
        for a in vecs {
            for &b in &self.b_values {
                out.push(LogIndex::new(a.clone(), b));
            }
        }
        out
    }

    pub fn contains(&self, idx: &LogIndex) -> bool {
        idx.a.iter().all(|x| self.a_values.contains(x)) && self.b_values.contains(&idx.b)
    }
}

impl fmt::Display for IndexTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[u32]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("|");
        write!(f, "a={{{}}}, b={{{}}}", show(&self.a_values), show(&self.b_values))
    }
}
