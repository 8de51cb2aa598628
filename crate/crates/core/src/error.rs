use thiserror::Error;

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("dangling node index {index} in bar {bar} (layout has {node_count} nodes)")]
    DanglingNode {
        bar: usize,
        index: usize,
        node_count: usize,
    },
    #[error("duplicate bar between nodes {u} and {v}")]
    DuplicateBar { u: usize, v: usize },
    #[error("bar connects node {0} to itself")]
    SelfLoop(usize),
    #[error("{what}: expected {expected} components")]
    DimensionMismatch { expected: usize, what: String },
    #[error("{0}: non-finite value")]
    NonFinite(String),
    #[error("bar {0}: malformed cross-section for this layout")]
    BadSection(usize),
    #[error("malformed layout document: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("catalog is empty")]
    Empty,
    #[error("catalog entries out of order at line {0}")]
    Unordered(usize),
    #[error("cannot read catalog {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("unknown case '{0}' (expected ten-bar-load1, ten-bar-load2, seventeen-bar or sundial)")]
    UnknownCase(String),
    #[error("case '{case}' does not support {requested} nodes (allowed: {allowed:?})")]
    NodeCount {
        case: String,
        requested: usize,
        allowed: Vec<usize>,
    },
    #[error("case file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("case file: {0}")]
    Invalid(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("cannot read case file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RefineError {
    #[error("nothing to refine: the starting layout set is empty")]
    NothingToRefine,
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed checkpoint: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported checkpoint format {0}")]
    Format(u32),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}
