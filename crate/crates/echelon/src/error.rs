//! Errors shared across the crate. Each variant corresponds to one of the
//! failure modes surfaced by the command line (parse, precondition,
//! resonance, convergence abort).

use crate::index::{MultiIndex, Signature};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    SignatureMismatch { left: Signature, right: Signature },
    ScaleDomain { s: f64, scale_max: f64 },
    TaylorOnly(&'static str),
    ArityMismatch { expected: usize, got: usize },
    NotTangentToIdentity,
    /// A small divisor vanished (or fell below the resonance tolerance).
    Resonance { witness: MultiIndex, value: f64 },
    /// Condition (E) failed and the operator does not raise filtration order.
    NotExponentiable { bound: f64, s: f64 },
    /// The quadratic part of a would-be Morse germ is singular.
    DegenerateQuadraticPart,
    /// A residual component fell outside the transversal and the correctable
    /// range (for torus problems: an angle-free action-linear term).
    FrequencyDrift { witness: MultiIndex, value: f64 },
    EmptyProbeSet,
    Unsupported(&'static str),
    Precondition(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SignatureMismatch { left, right } => write!(
                f,
                "signature mismatch: ({},{}) vs ({},{})",
                left.fourier, left.taylor, right.fourier, right.taylor
            ),
            Error::ScaleDomain { s, scale_max } => {
                write!(f, "scale parameter s={s} outside (0,{scale_max})")
            }
            Error::TaylorOnly(op) => write!(f, "{op} requires a pure Taylor lattice"),
            Error::ArityMismatch { expected, got } => {
                write!(f, "expected {expected} components, got {got}")
            }
            Error::NotTangentToIdentity => {
                write!(f, "map tuple is not tangent to the identity")
            }
            Error::Resonance { witness, value } => {
                write!(f, "resonant divisor {value:e} at index {witness}")
            }
            Error::NotExponentiable { bound, s } => write!(
                f,
                "condition (E) fails (3N={:.3e} vs s={s}) and the operator does not raise order; \
                 pass an explicit domain override to evaluate anyway",
                3.0 * bound
            ),
            Error::DegenerateQuadraticPart => write!(f, "quadratic part is degenerate"),
            Error::FrequencyDrift { witness, value } => write!(
                f,
                "frequency-drift residual {value:e} at index {witness}: not correctable and \
                 outside the transversal"
            ),
            Error::EmptyProbeSet => write!(f, "probe set contains no nonzero series"),
            Error::Unsupported(what) => write!(f, "unsupported: {what}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl Error {
    /// Machine-readable kind tag used by the CLI error JSON and exit codes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SignatureMismatch { .. }
            | Error::ScaleDomain { .. }
            | Error::TaylorOnly(_)
            | Error::ArityMismatch { .. }
            | Error::NotTangentToIdentity
            | Error::DegenerateQuadraticPart
            | Error::EmptyProbeSet
            | Error::Unsupported(_)
            | Error::Precondition(_) => "precondition",
            Error::Resonance { .. } => "resonance",
            Error::NotExponentiable { .. } | Error::FrequencyDrift { .. } => "convergence",
        }
    }
}
