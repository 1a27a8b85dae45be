use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Parse errors carry the 1-based line number of the offending line.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate vertex id `{id}`")]
    DuplicateVertex { line: usize, id: String },
    #[error("line {line}: duplicate edge `{u}`-`{v}`")]
    DuplicateEdge { line: usize, u: String, v: String },
    #[error("line {line}: vertex `{id}` has nonpositive measure {value}")]
    NonpositiveMeasure { line: usize, id: String, value: f64 },
    #[error("line {line}: edge `{u}`-`{v}` has nonpositive weight {value}")]
    NonpositiveWeight {
        line: usize,
        u: String,
        v: String,
        value: f64,
    },
    #[error("line {line}: self-loop at `{id}`")]
    SelfLoop { line: usize, id: String },
    #[error("line {line}: vertex `{id}` is not declared")]
    UndeclaredVertex { line: usize, id: String },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("vertex index {0} out of range")]
    VertexOutOfRange(usize),
    #[error("vertex `{0}` is isolated")]
    IsolatedVertex(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid exponent p = {p}: {reason}")]
    InvalidExponent { p: f64, reason: &'static str },
    #[error("graph has no edges")]
    EdgelessGraph,
    #[error("function is identically zero")]
    ZeroFunction,
    #[error("function is constant")]
    ConstantFunction,
    #[error("function takes negative values")]
    NegativeFunction,
    #[error("function has {got} values, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{count} candidate vertices exceed the exact enumeration cutoff {cutoff}")]
    CutoffExceeded { count: usize, cutoff: usize },
    #[error("no admissible level set")]
    NoAdmissibleSet,
    #[error("empty interior")]
    EmptyInterior,
    #[error("infeasible generator: {0}")]
    InfeasibleGenerator(String),
    #[error("pair weight exceeds b*sigma on edge `{u}`-`{v}`")]
    WeightDomination { u: String, v: String },
    #[error("function is not in the admissible class: {0}")]
    NotAdmissible(String),
    #[error("all radii are saturated")]
    Saturated,
    #[error("metric check failed at `{0}`")]
    MetricCheck(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_p_open(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent {
            p,
            reason: "expected p in (1, inf)",
        })
    }
}

pub(crate) fn check_p_closed(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent {
            p,
            reason: "expected p in [1, inf)",
        })
    }
}
