//! Test operators and their exact spectral ground truth.

mod classify;
mod operator;
mod oracle;
mod poles;

pub use classify::{check_generic, classify_spectrum, GenericityReport, SpectrumClassification};
pub use operator::{build_operator, LinearOperator, OperatorSpec, Potential};
pub use oracle::{spectral_oracle, SpectralOracle, DEFAULT_ORACLE_CAP, DEFAULT_TOL_PROJ};
pub use poles::{p_plane_poles, principal_sqrt, PPole, PoleClass};

/// Default relative tolerance for treating an eigenvalue as real.
pub const DEFAULT_TOL_REAL_REL: f64 = 1e-9;
/// Default genericity threshold `‖P_i f‖ > tol_gen ‖f‖`.
pub const DEFAULT_TOL_GEN: f64 = 1e-10;
