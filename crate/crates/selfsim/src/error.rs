use thiserror::Error;

/// Crate-wide error type. Certified operations never return a wrong answer;
/// when certification is impossible within the precision or resource budget
/// they fail with one of these variants instead.
#[derive(Debug, Error)]
pub enum Error {
    /// Precision escalation reached the context ceiling without resolving
    /// the decision at hand.
    #[error("no convergence at {reached} bits (ceiling {ceiling}): {what}")]
    NoConvergence {
        what: String,
        reached: u32,
        ceiling: u32,
    },

    /// An enumeration would exceed the configured memory cap.
    #[error("memory budget exceeded: {what} needs {needed} entries, cap is {cap}")]
    MemoryBudget {
        what: String,
        needed: u128,
        cap: u64,
    },

    /// A quadrature or sampling routine could not reach the requested
    /// error budget within its evaluation allowance.
    #[error("evaluation budget exceeded: {0}")]
    BudgetExceeded(String),

    /// Numeric-mode collapse met pairs that are neither certifiably merged
    /// nor certifiably distinct at the given tolerance.
    #[error("ambiguous collapse at tolerance {tol}: {count} unresolved pairs (first: {first})")]
    AmbiguousCollapse {
        tol: String,
        count: usize,
        first: String,
    },

    /// Two breakpoints of an entropy-at-scale sweep could not be certified
    /// distinct-or-equal.
    #[error("ambiguous breakpoints in scale-entropy sweep: {0}")]
    AmbiguousBreakpoint(String),

    /// A polynomial root degenerates the requested quantity (for example a
    /// zero root in a reciprocal Mahler product).
    #[error("degenerate root: {0}")]
    DegenerateRoot(String),

    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
