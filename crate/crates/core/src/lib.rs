//! Exact intersection theory on moduli spaces of stable curves.
//!
//! The crate represents tautological classes as rational linear combinations
//! of decorated dual graphs, evaluates intersection numbers through
//! Witten-Kontsevich point correlators, and decides Gorenstein vanishing by
//! the recursive boundary-restriction procedure.  A separate layer implements
//! the infinitesimal upper and lower triangular actions on truncated
//! correlator tables as a cross-validation device.
//!
//! All arithmetic is exact: every scalar is an arbitrary-precision rational.

pub mod corr;
pub mod error;
pub mod eval;
pub mod givental;
pub mod graph;
pub mod lee;
pub mod rat;
pub mod tau;

pub use corr::{integral_psi_kappa, point_correlator, CorrelatorKey};
pub use error::Error;
pub use eval::{pair, InducedEntrySpec, PsiKappaMonomial};
pub use graph::{AmbientSpace, DualGraph, GraphSum, Marking, ModuliFactor};
pub use lee::{check, find_relations, gorenstein_rank, Verdict};
pub use rat::Rat;
pub use tau::{rho, tau, tau_on_factor, BoundaryComponentId};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
