use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("Haar index j = {j} outside 1..={max}")]
    HaarIndexOutOfRange { j: u32, max: u32 },
    #[error("coordinate {coord} is outside [0, 2^{level})")]
    CoordinateOutOfRange { coord: u64, level: u32 },
    #[error("expected {expected} coordinates, found {found}")]
    CoordinateCount { expected: usize, found: usize },
    #[error("shape mismatch: expected dim={expected_dim} depth={expected_depth}, found dim={found_dim} depth={found_depth}")]
    ShapeMismatch {
        expected_dim: usize,
        expected_depth: usize,
        found_dim: usize,
        found_depth: usize,
    },
    #[error("expected {expected} cell values, found {found}")]
    ValueCount { expected: usize, found: usize },
    #[error("depth {depth} cannot resolve the split of a level-{level} cube")]
    DepthTooShallow { level: u32, depth: usize },
    #[error("weight cell {index} is not a finite positive number ({value})")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("exponent p must exceed 1, got {0}")]
    InvalidExponent(f64),
    #[error("signature must have {dim} entries in {{0,1}} and at least one zero")]
    InvalidSignature { dim: usize },
    #[error("power weight exponent {alpha} must exceed -{dim}")]
    InvalidPowerExponent { alpha: f64, dim: usize },
    #[error("cascade amplitude {0} must lie in (0, 1)")]
    InvalidCascadeAmplitude(f64),
    #[error("cascade decay {0} must lie in (0, 1]")]
    InvalidCascadeDecay(f64),
    #[error("symbol has zero rectangular mean oscillation")]
    ZeroOscillation,
    #[error(
        "power iteration did not converge after {iterations} iterations (last estimate {estimate})"
    )]
    NonConvergence { iterations: usize, estimate: f64 },
    #[error("sign pattern has {found} entries, expected {expected}")]
    MissingSign { expected: usize, found: usize },
    #[error("sign pattern entry {index} is {value}, expected +1 or -1")]
    InvalidSign { index: usize, value: i8 },
    #[error("Carleson sequence entry {index} is negative or not finite ({value})")]
    NegativeCarleson { index: usize, value: f64 },
    #[error("inconsistent induction instance at node {node}: {reason}")]
    InconsistentInstance { node: usize, reason: &'static str },
    #[error("scaling fit needs at least two weights with distinct characteristics")]
    DegenerateFamily,
    #[error("proposition wp1 requires a Carleson sequence")]
    MissingCarlesonSequence,
    #[error("sample count must be positive")]
    NoSamples,
    #[error("matrix is {rows}x{cols}, weight has {cells} cells")]
    MatrixShape {
        rows: usize,
        cols: usize,
        cells: usize,
    },
}
