//! Deterministic JSON reports.
//!
//! Maps are ordered by key, floats are written as `{:.16e}` (17 significant
//! digits, enough to round-trip), and non-finite floats become `null`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::chart::grid::MaxAt;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    List(Vec<Json>),
    Map(BTreeMap<String, Json>),
}

impl Json {
    pub fn map() -> Self {
        Json::Map(BTreeMap::new())
    }

    /// Inserts into a map; panics on other variants.
    pub fn set(&mut self, key: &str, value: impl Into<Json>) -> &mut Self {
        match self {
            Json::Map(m) => {
                m.insert(key.to_string(), value.into());
            }
            _ => panic!("Json::set on a non-map"),
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&Json> {
        match self {
            Json::Map(m) => m.get(key),
            _ => None,
        }
    }

    pub fn to_pretty(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Num(x) if x.is_finite() => {
                let _ = write!(out, "{x:.16e}");
            }
            Json::Num(_) => out.push_str("null"),
            Json::Str(s) => out.push_str(&serde_json::to_string(s).expect("string escapes")),
            Json::List(v) if v.is_empty() => out.push_str("[]"),
            Json::List(v) => {
                out.push('[');
                for (k, x) in v.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    x.write(out, indent);
                }
                out.push(']');
            }
            Json::Map(m) if m.is_empty() => out.push_str("{}"),
            Json::Map(m) => {
                out.push_str("{\n");
                for (k, (key, x)) in m.iter().enumerate() {
                    out.push_str(&"  ".repeat(indent + 1));
                    out.push_str(&serde_json::to_string(key).expect("string escapes"));
                    out.push_str(": ");
                    x.write(out, indent + 1);
                    if k + 1 < m.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&"  ".repeat(indent));
                out.push('}');
            }
        }
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_pretty()).map_err(|e| Error::io(path, e))
    }
}

impl From<bool> for Json {
    fn from(b: bool) -> Self {
        Json::Bool(b)
    }
}

impl From<f64> for Json {
    fn from(x: f64) -> Self {
        Json::Num(x)
    }
}

impl From<usize> for Json {
    fn from(x: usize) -> Self {
        Json::Int(x as i64)
    }
}

impl From<&str> for Json {
    fn from(s: &str) -> Self {
        Json::Str(s.to_string())
    }
}

impl From<String> for Json {
    fn from(s: String) -> Self {
        Json::Str(s)
    }
}

impl<T: Into<Json>> From<Vec<T>> for Json {
    fn from(v: Vec<T>) -> Self {
        Json::List(v.into_iter().map(Into::into).collect())
    }
}

/// One named verification: `{max_residual, node, tol, pass}`.
///
/// For margin checks `max_residual` holds the smallest margin and `pass`
/// means the margin exceeds `tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub max_residual: f64,
    pub node: Vec<usize>,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when the residual is finite and at most `tol`.
    pub fn residual(m: MaxAt, tol: f64) -> Self {
        Check {
            max_residual: m.value,
            node: vec![m.node.0, m.node.1],
            tol,
            pass: m.value.is_finite() && m.value <= tol,
        }
    }

    /// Passes when the margin exceeds `tol`.
    pub fn margin(m: MaxAt, tol: f64) -> Self {
        Check {
            max_residual: m.value,
            node: vec![m.node.0, m.node.1],
            tol,
            pass: m.value.is_finite() && m.value > tol,
        }
    }

    pub fn scalar(value: f64, tol: f64) -> Self {
        Check {
            max_residual: value,
            node: Vec::new(),
            tol,
            pass: value.is_finite() && value <= tol,
        }
    }

    pub fn to_json(&self) -> Json {
        let mut j = Json::map();
        j.set("max_residual", self.max_residual)
            .set("node", self.node.clone())
            .set("tol", self.tol)
            .set("pass", self.pass);
        j
    }
}

/// Named checks in key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckSet(pub BTreeMap<String, Check>);

impl CheckSet {
    pub fn insert(&mut self, name: &str, c: Check) {
        self.0.insert(name.to_string(), c);
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.0.get(name)
    }

    pub fn pass(&self) -> bool {
        self.0.values().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.0
            .iter()
            .filter(|(_, c)| !c.pass)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn to_json(&self) -> Json {
        Json::Map(self.0.iter().map(|(k, c)| (k.clone(), c.to_json())).collect())
    }
}
