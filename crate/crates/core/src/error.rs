use thiserror::Error;

use crate::clifford::CliffordError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("expected {expected} axes, found {found}")]
    AxisCount { expected: usize, found: usize },
    #[error("axis {axis} has {extent} samples; at least {} are required", crate::grid::MIN_EXTENT)]
    TooFewSamples { axis: usize, extent: usize },
    #[error("axis {axis} has invalid spacing {spacing}")]
    BadSpacing { axis: usize, spacing: f64 },
    #[error("grid origin is not finite")]
    BadOrigin,
    #[error("fields live on different grids")]
    Mismatch,
    #[error("field holds {found} values, grid needs {expected}")]
    FieldLength { expected: usize, found: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("immersion differential is rank deficient at node {node} (smallest singular value {singular_value:.3e})")]
    RankDeficient { node: usize, singular_value: f64 },
    #[error("ambient dimension {ambient} is smaller than chart dimension {chart}")]
    Dimension { ambient: usize, chart: usize },
    #[error("normal pair rotation needs codimension at least 2, found {codim}")]
    NormalPair { codim: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinFieldError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error("spin lift at node {node} is ambiguous (distance {distance:.3e} to the neighbouring lift); the frame is discontinuous")]
    LiftDiscontinuity { node: usize, distance: f64 },
    #[error("spinor at node {node} violates tau(phi) phi = 1 by {defect:.3e}")]
    UnitInvariant { node: usize, defect: f64 },
    #[error("direction {axis} out of range for a {dim}-dimensional chart")]
    Direction { axis: usize, dim: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeierstrassError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error("one-form is not closed enough to integrate: max |d xi| = {max_residual:.3e} exceeds {threshold:.3e}")]
    NotClosedEnough { max_residual: f64, threshold: f64 },
    #[error("point sets differ in size ({reconstructed} vs {reference})")]
    CountMismatch { reconstructed: usize, reference: usize },
    #[error("point configuration is degenerate: cross-covariance has rank {rank} in dimension {dim}")]
    DegenerateConfiguration { rank: usize, dim: usize },
    #[error("validator needs at least one normal direction")]
    NoNormalBundle,
    #[error("one-form carries no transported frame; build it from a spinor field")]
    NoTransport,
    #[error("spinor at node {node} violates tau(phi) phi = 1 by {defect:.3e}")]
    UnitInvariant { node: usize, defect: f64 },
    #[error("{0}")]
    Input(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("unknown scenario '{0}'")]
    Unknown(String),
    #[error("grid leaves the scenario domain on axis {axis}: [{lo}, {hi}] not inside [{domain_lo}, {domain_hi}]")]
    DomainExceeded {
        axis: usize,
        lo: f64,
        hi: f64,
        domain_lo: f64,
        domain_hi: f64,
    },
    #[error("invalid scenario parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Any failure in the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Clifford(#[from] CliffordError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    SpinField(#[from] SpinFieldError),
    #[error(transparent)]
    Weierstrass(#[from] WeierstrassError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Input(String),
}
