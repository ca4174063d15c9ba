use alloc::string::String;
use core::fmt;

/// Everything that can go wrong while building or checking a triple system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Two blocks cover the same pair of points.
    DuplicatePair {
        a: u32,
        b: u32,
    },
    /// A block does not consist of three distinct points below the order.
    BadBlock {
        block: [u32; 3],
        order: usize,
    },
    /// The operation needs a complete system.
    Incomplete,
    /// A relabelling map is not a bijection on the point set.
    NotBijective,
    EvenModulus(u32),
    BadParity {
        low: u32,
        high: u32,
    },
    BadRange {
        low: u32,
        high: u32,
    },
    /// The base system does not sit inside the host under the given injection.
    NotEmbedded,
    /// A forbidden class contains a system of order at most 3.
    TrivialForbidden {
        order: usize,
    },
    /// Doubling needs an odd host order of at least 11.
    OrderTooSmall(usize),
    /// The supplied 6-cycle is not a cycle of the leave.
    BadCycle(String),
    /// No point survived the coset-safety filter while extending the bijection.
    NoSafeChoice {
        index: u32,
    },
    OutOfRange {
        u: u32,
        i: u32,
    },
    InternalInconsistency(String),
    /// A graph handed to the 6-cycle decomposer has a vertex of odd degree.
    BadDegrees {
        vertex: u32,
        degree: usize,
    },
    /// A graph handed to the 6-cycle decomposer has an edge count not divisible by 6.
    BadEdgeCount(usize),
    DecompositionNotFound {
        last_order: usize,
    },
    StepFailed {
        step: usize,
        reason: String,
    },
    BudgetExceeded {
        order: usize,
        cap: usize,
    },
    OverlapNotSubsystem(String),
    WitnessInvalid(String),
    WitnessNotFound,
    BadDimension(u32),
    BadCongruence {
        order: usize,
    },
    SearchExhausted,
    /// The gluing map is not injective or names points outside the systems.
    BadIdentification(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DuplicatePair { a, b } => write!(f, "pair {{{a},{b}}} occurs in two blocks"),
            Error::BadBlock { block, order } => write!(
                f,
                "block {{{},{},{}}} is not three distinct points below {order}",
                block[0], block[1], block[2]
            ),
            Error::Incomplete => f.write_str("operation requires a complete system"),
            Error::NotBijective => f.write_str("map is not a bijection on the point set"),
            Error::EvenModulus(n) => write!(f, "modulus {n} is not odd and at least 3"),
            Error::BadParity { low, high } => write!(f, "bounds {low}, {high} must both be odd"),
            Error::BadRange { low, high } => write!(f, "bounds must satisfy 3 <= {low} <= {high}"),
            Error::NotEmbedded => f.write_str("base system is not embedded in the host"),
            Error::TrivialForbidden { order } => {
                write!(f, "forbidden class contains a trivial system of order {order}")
            }
            Error::OrderTooSmall(u) => write!(f, "doubling needs odd order >= 11, got {u}"),
            Error::BadCycle(why) => write!(f, "bad 6-cycle: {why}"),
            Error::NoSafeChoice { index } => {
                write!(f, "no coset-safe image available for index {index}")
            }
            Error::OutOfRange { u, i } => write!(f, "index {i} outside the audit range for u = {u}"),
            Error::InternalInconsistency(why) => write!(f, "internal inconsistency: {why}"),
            Error::BadDegrees { vertex, degree } => {
                write!(f, "vertex {vertex} has odd degree {degree}")
            }
            Error::BadEdgeCount(m) => write!(f, "edge count {m} is not divisible by 6"),
            Error::DecompositionNotFound { last_order } => {
                write!(f, "no 6-cycle decomposition found up to order {last_order}")
            }
            Error::StepFailed { step, reason } => write!(f, "step {step} failed: {reason}"),
            Error::BudgetExceeded { order, cap } => {
                write!(f, "order {order} exceeds the configured maximum {cap}")
            }
            Error::OverlapNotSubsystem(why) => write!(f, "overlap is not a common subsystem: {why}"),
            Error::WitnessInvalid(why) => write!(f, "invalid witness: {why}"),
            Error::WitnessNotFound => f.write_str("no witness found in the catalog"),
            Error::BadDimension(n) => write!(f, "dimension {n} must be at least 1"),
            Error::BadCongruence { order } => {
                write!(
                    f,
                    "order {order} is not in the congruence class this construction needs"
                )
            }
            Error::SearchExhausted => f.write_str("search budget exhausted"),
            Error::BadIdentification(why) => write!(f, "bad identification: {why}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T, E = Error> = core::result::Result<T, E>;
