use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;

/// Runtime values. Base-type elements are arbitrary precision integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Base(BigInt),
    Leaf,
    Node(Arc<Value>, BigInt, Arc<Value>),
}

impl Value {
    pub fn base(n: i64) -> Value {
        Value::Base(BigInt::from(n))
    }

    pub fn node(l: Value, a: impl Into<BigInt>, r: Value) -> Value {
        Value::Node(Arc::new(l), a.into(), Arc::new(r))
    }

    pub fn is_tree(&self) -> bool {
        matches!(self, Value::Leaf | Value::Node(..))
    }

    /// Number of leaves; `None` for non-tree values.
    pub fn size(&self) -> Option<u64> {
        match self {
            Value::Leaf => Some(1),
            Value::Node(l, _, r) => Some(l.size()? + r.size()?),
            _ => None,
        }
    }

    pub fn inorder(&self) -> Vec<BigInt> {
        let mut out = Vec::new();
        fn go(v: &Value, out: &mut Vec<BigInt>) {
            if let Value::Node(l, a, r) = v {
                go(l, out);
                out.push(a.clone());
                go(r, out);
            }
        }
        go(self, &mut out);
        out
    }

    pub fn root_label(&self) -> Option<&BigInt> {
        match self {
            Value::Node(_, a, _) => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("size is only defined on trees, got {0}")]
pub struct NotATree(pub String);

/// Tree size as the number of leaves: `|nil| = 1`, `|(t,a,u)| = |t| + |u|`.
pub fn size(v: &Value) -> Result<u64, NotATree> {
    v.size().ok_or_else(|| NotATree(v.to_string()))
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Base(n) => write!(f, "{n}"),
            Value::Leaf => write!(f, "nil"),
            Value::Node(l, a, r) => write!(f, "({l}, {a}, {r})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let one = Value::node(Value::Leaf, 1, Value::Leaf);
        assert_eq!(size(&Value::Leaf), Ok(1));
        assert_eq!(size(&one), Ok(2));
        assert_eq!(size(&Value::node(one, 2, Value::Leaf)), Ok(3));
        assert!(size(&Value::Bool(true)).is_err());
    }
}
