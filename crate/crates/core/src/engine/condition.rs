//! Guard and condition expressions.
//!
//! Grammar: `<identifier> <op> <literal>` where `op` is one of
//! `== != < <= > >=` and the literal is a JSON number, string or boolean.
//! The single word `else` marks a default branch.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "==",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }

    fn holds(self, ord: Ordering) -> bool {
        match self {
            CompareOp::Eq => ord == Ordering::Equal,
            CompareOp::Ne => ord != Ordering::Equal,
            CompareOp::Lt => ord == Ordering::Less,
            CompareOp::Le => ord != Ordering::Greater,
            CompareOp::Gt => ord == Ordering::Greater,
            CompareOp::Ge => ord != Ordering::Less,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub variable: String,
    pub op: CompareOp,
    pub literal: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Guard {
    Else,
    Condition(Condition),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConditionError {
    #[error("expected an identifier at offset {0}")]
    Identifier(usize),
    #[error("expected a comparison operator at offset {0}")]
    Operator(usize),
    #[error("expected a number, string or boolean literal: {0}")]
    Literal(String),
}

impl Guard {
    pub fn parse(text: &str) -> Result<Guard, ConditionError> {
        if text.trim() == "else" {
            return Ok(Guard::Else);
        }
        Condition::parse(text).map(Guard::Condition)
    }
}

impl Condition {
    pub fn parse(text: &str) -> Result<Condition, ConditionError> {
        let bytes = text.as_bytes();
        let mut pos = skip_ws(bytes, 0);
        let start = pos;
        if pos < bytes.len() && (bytes[pos].is_ascii_alphabetic() || bytes[pos] == b'_') {
            pos += 1;
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
        } else {
            return Err(ConditionError::Identifier(start));
        }
        let variable = text[start..pos].to_owned();
        pos = skip_ws(bytes, pos);
        let rest = &text[pos..];
        let (op, len) = [
            ("==", CompareOp::Eq),
            ("!=", CompareOp::Ne),
            ("<=", CompareOp::Le),
            (">=", CompareOp::Ge),
            ("<", CompareOp::Lt),
            (">", CompareOp::Gt),
        ]
        .into_iter()
        .find(|(sym, _)| rest.starts_with(sym))
        .map(|(sym, op)| (op, sym.len()))
        .ok_or(ConditionError::Operator(pos))?;
        let literal_text = rest[len..].trim();
        let literal: Value =
            serde_json::from_str(literal_text).map_err(|_| ConditionError::Literal(literal_text.to_owned()))?;
        if !matches!(literal, Value::Number(_) | Value::String(_) | Value::Bool(_)) {
            return Err(ConditionError::Literal(literal_text.to_owned()));
        }
        Ok(Condition { variable, op, literal })
    }

    /// Evaluates against instance variables. Undefined variables and type
    /// mismatches evaluate to false.
    pub fn evaluate(&self, variables: &BTreeMap<String, Value>) -> bool {
        let Some(value) = variables.get(&self.variable) else { return false };
        let ord = match (value, &self.literal) {
            (Value::Number(a), Value::Number(b)) => match (a.as_f64(), b.as_f64()) {
                (Some(a), Some(b)) => a.partial_cmp(&b),
                _ => None,
            },
            (Value::String(a), Value::String(b)) => Some(a.cmp(b)),
            (Value::Bool(a), Value::Bool(b)) if matches!(self.op, CompareOp::Eq | CompareOp::Ne) => Some(a.cmp(b)),
            _ => None,
        };
        ord.is_some_and(|o| self.op.holds(o))
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.variable, self.op.symbol(), self.literal)
    }
}

fn skip_ws(bytes: &[u8], mut pos: usize) -> usize {
    while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
        pos += 1;
    }
    pos
}
