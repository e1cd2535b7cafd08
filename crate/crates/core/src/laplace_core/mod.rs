//! Laplace-side computations: resolvent solves, the pole/remainder split of
//! `W(p) = (L + p²)⁻¹ f`, the limiting-absorption ladder, Bromwich inversion
//! of the remainder and the transform identities used as cross-checks.

mod abelian;
mod absorption;
mod bromwich;
mod decompose;
mod resolvent;
mod transform;

pub use abelian::{abelian_check, default_p_ladder, laplace_side_average, AbelianResult, ABELIAN_STEP};
pub use absorption::{default_ladder, limiting_absorption, AbsorptionResult};
pub use bromwich::{bromwich_invert, bromwich_invert_many, BromwichOptions, BromwichResult, LaplaceSampler};
pub use decompose::{decompose, fit_line, write_w1_csv, BoundFit, DecompositionReport, ImagPole, RightPole, W1Sampler};
pub use resolvent::{resolvent_solve_k, resolvent_solve_p, shifted_solve, MAX_CONDITION};
pub use transform::{
    integration_rule_check, numeric_laplace, numeric_laplace_series, plancherel_check, LaplaceEstimate,
    PlancherelResult,
};
