//! Numerical laboratory for sign-changing radial stationary solutions of
//! the two-dimensional Lane-Emden problem
//!
//! ```text
//! -Δu = |u|^{p-1} u   in the unit disk,   u = 0 on the boundary,
//! ```
//!
//! together with the objects that govern blow-up of the associated
//! semilinear heat flow v_t = Δv + |v|^{p-1} v:
//!
//! * [`shooting`] / [`stationary`] — construction of the unique radial
//!   solution with K nodal regions by shooting in log-radius coordinates
//!   and exact scaling.
//! * [`liouville`] — the closed-form limit bubble U and the rescaled
//!   profiles that converge to it.
//! * [`spectrum`] — first eigenpairs of the linearized operator
//!   −Δ − p|u|^{p−1} and of the limit operator −Δ − e^U.
//! * [`criteria`] — the concentration quantities S_{p,R}, M_{p,R},
//!   M'_{p,R}, the pointwise r²p|u|^{p-1} bound and the scalar-product
//!   blow-up criterion ∫ u φ₁.
//! * [`heat`] — adaptive implicit integration of the radial heat flow
//!   with blow-up / global classification.
//!
//! All solver internals work with t = ln ρ and with exponents kept in
//! log scale: the K-th shooting zero grows like e^{p/4}, so quantities
//! such as μ_p⁺ or p|u|^{p-1} span hundreds of decades across the
//! default p-sweep and would overflow f64 in naive form.

pub mod cache;
pub mod criteria;
pub mod error;
pub mod grid;
pub mod heat;
pub mod liouville;
pub mod quad;
pub mod report;
pub mod shooting;
pub mod spectrum;
pub mod stationary;
pub mod tridiag;

pub use criteria::{ConditionReport, ScalarCriterion};
pub use error::LabError;
pub use grid::RadialGrid;
pub use heat::{Classification, HeatTrajectory, SchemeParams, SweepReport};
pub use liouville::{LiouvilleBubble, RescaledProfile};
pub use shooting::{RawShot, ShotParams};
pub use spectrum::{EigenPair, EigenReport, LpEigenPair};
pub use stationary::StationarySolution;
