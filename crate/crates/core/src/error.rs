use std::path::PathBuf;

use thiserror::Error;

/// A grid node, `(i, j)` with `i` along `u` and `j` along `v`.
pub type Node = (usize, usize);

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid has {nodes} nodes along {axis}, stencil needs at least {needed}")]
    GridTooSmall {
        axis: &'static str,
        nodes: usize,
        needed: usize,
    },

    #[error("field shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value in {what} at node {node:?}")]
    NonFinite { what: String, node: Node },

    #[error("integration origin {coordinate} = 0 is not a grid line along {axis}")]
    OriginNotOnGrid { axis: &'static str, coordinate: f64 },

    #[error("corner data incompatible: a(u0) = {a}, b(v0) = {b}")]
    CornerMismatch { a: f64, b: f64 },

    #[error("patch invariant violated at node {node:?}: {what}")]
    PatchInvariant { what: String, node: Node },

    #[error("degenerate metric at node {node:?} (EG - F^2 = {det})")]
    DegenerateMetric { node: Node, det: f64 },

    #[error("first normal space has dimension 3 at node {node:?}")]
    FirstNormalSpaceTooLarge { node: Node },

    #[error("unknown catalog surface '{0}'")]
    UnknownSurface(String),

    #[error("profile is not admissible for isothermic reparametrization: {0}")]
    BadProfile(String),

    #[error("admissibility condition {condition} fails at node {node:?}: {detail}")]
    Admissibility {
        condition: &'static str,
        node: Node,
        detail: String,
    },

    #[error("triple construction fails at node {node:?}: {detail}")]
    TripleDomain { node: Node, detail: String },

    #[error("operation needs {expected}, got {got}")]
    WrongKind {
        expected: &'static str,
        got: &'static str,
    },

    #[error("marching left the chart: {0}")]
    MarchingBlowup(String),

    #[error("parametrization singular at node {node:?} (det P = {det})")]
    SingularP { node: (usize, usize, usize), det: f64 },

    #[error("compatibility defect: {0}")]
    Compatibility(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
