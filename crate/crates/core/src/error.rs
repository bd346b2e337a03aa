//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong on a mathematically invalid input.
///
/// Dimension-mismatched *values* are not errors (those integrals are zero);
/// only violated preconditions are reported here.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// kappa_0 is not a decoration; it is the scalar 2g-2+n.
    #[error("kappa index 0 is not allowed here; kappa_0 = 2g-2+n acts by scalar multiplication")]
    KappaIndexZero,

    /// A moduli space (g, n) with 2g-2+n <= 0.
    #[error("unstable moduli space: g = {genus}, n = {points}")]
    Unstable { genus: u32, points: usize },

    /// A dual graph violating one of its structural invariants.
    #[error("invalid dual graph: {0}")]
    InvalidGraph(String),

    /// Graph degree exceeding the dimension of the ambient space.
    #[error("degree {degree} exceeds the ambient dimension {dimension}")]
    DegreeExceedsDimension { degree: u32, dimension: u32 },

    /// Pairing a class against a monomial of non-complementary degree.
    #[error("degree mismatch: class of dimension {expected} paired against degree {found}")]
    DegreeMismatch { expected: i64, found: i64 },

    /// A graph sum mixing terms of different degrees.
    #[error("inhomogeneous graph sum: degrees {0} and {1} mixed")]
    InhomogeneousSum(u32, u32),

    /// Operator index k <= 0 passed to a boundary-restriction operator.
    #[error("boundary operator index must be positive, got {0}")]
    NonPositiveTauIndex(i64),

    /// A class of negative dimension where a nonnegative one is required.
    #[error("class has negative dimension {0}")]
    NegativeDimension(i64),

    /// A correlator outside the caps of a truncated table was requested.
    #[error("truncation leak: correlator (g = {genus}, n = {points}, max d = {max_exp}) outside caps (g <= {g_max}, n <= {n_max}, d <= {d_max})")]
    TruncationLeak {
        genus: u32,
        points: usize,
        max_exp: u32,
        g_max: u32,
        n_max: usize,
        d_max: u32,
    },

    /// Genus-0 one-point correlators are excluded from truncated tables.
    #[error("genus-0 one-point correlator keys are not supported by this action")]
    OnePointGenusZero,

    /// A Lie-algebra coefficient matrix violating the parity constraint.
    #[error("parity violation: coefficient matrix at index {index} must be {expected} with respect to eta")]
    ParityViolation { index: usize, expected: &'static str },

    /// Malformed textual input (graph keys, sums, potentials, monomials).
    #[error("parse error: {0}")]
    Parse(String),
}
