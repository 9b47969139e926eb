use std::path::PathBuf;

use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph needs at least one row and one interior column (got m={m}, n={n})")]
    EmptyGraph { m: usize, n: usize },
    #[error("edge cost table does not match a graph with m={m}, n={n}")]
    CostShape { m: usize, n: usize },
    #[error("edge costs must be finite and nonnegative (got {0})")]
    NegativeCost(f64),
    #[error("connector edge {edge} of row {row} must cost 0 (got {cost})")]
    NonzeroConnector { row: usize, edge: usize, cost: f64 },
    #[error("at least one base station is required")]
    NoBaseStation,
    #[error("base station {0} is not on a connector column")]
    InteriorBase(VertexId),
    #[error("vertex {vertex} outside graph with m={m}, n={n}")]
    VertexOutOfRange {
        vertex: VertexId,
        m: usize,
        n: usize,
    },
    #[error("row {row} outside 1..={m}")]
    RowOutOfRange { row: usize, m: usize },
    #[error("no base station on column {col} to return to from row {row}")]
    NoBaseOnColumn { row: usize, col: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassError {
    #[error("priority classes must not be empty")]
    Empty,
    #[error("priority level must be >= 1")]
    ZeroLevel,
    #[error("priority level {0} defined twice")]
    DuplicateLevel(u32),
    #[error("class {level}: gain ratio and mean cost must be positive and finite")]
    NonPositive { level: u32 },
    #[error("gain ratio must increase with priority level (level {level} breaks the order)")]
    GainOrder { level: u32 },
    #[error("boundary comparison needs a lower and a higher level with increasing gain ratio")]
    Ordering,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MissionError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error("task at {0} is not on an interior vertex")]
    TaskOffInterior(VertexId),
    #[error("two tasks share vertex {0}")]
    DuplicateTask(VertexId),
    #[error("task at {vertex} uses undefined priority level {level}")]
    UnknownLevel { vertex: VertexId, level: u32 },
    #[error("task at {vertex} has invalid cost {cost}")]
    InvalidCost { vertex: VertexId, cost: f64 },
    #[error("requested {requested} tasks but the graph has only {available} interior vertices")]
    TooManyTasks { requested: usize, available: usize },
    #[error("level proportions must be nonnegative, finite, sum to a positive value, and match the class count")]
    Proportions,
    #[error("budgets must be finite and nonnegative")]
    Budget,
    #[error("robots must deploy from a base station, {0} is not one")]
    DeployNotBase(VertexId),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StoppingError {
    #[error("resource amount must be nonnegative (got {0})")]
    NegativeResource(f64),
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error("grid step must be positive and the state must lie on the grid")]
    Grid,
}

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed grid: {0}")]
    Csv(#[from] csv::Error),
    #[error("grid is empty")]
    Empty,
    #[error("line {line}: expected {expected} cells, found {found}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {col}: {value:?} is not a number")]
    NotNumeric {
        line: usize,
        col: usize,
        value: String,
    },
    #[error("band thresholds must be finite and strictly increasing")]
    Bands,
    #[error(transparent)]
    Mission(#[from] MissionError),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("missing field `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error(transparent)]
    Mission(#[from] MissionError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("trace line {line}: {reason}")]
pub struct TraceError {
    pub line: usize,
    pub reason: String,
}
