//! Numerical laboratory for Frenkel-Kontorova type chain models.
//!
//! Interaction energies are written in Lagrangian form
//! `E_ω(x, y) = L(τ_x ω, y − x)` over three environment families: the
//! circle, the irrational flow on the 2-torus, and the hull of a Beatty
//! sequence quasicrystal. On top of these the crate computes ground
//! energies, Mañé subadditive cocycles, near-calibrated configurations,
//! Kakutani-Rohlin towers with their transverse measures, and a finite
//! holonomic-measure linear program with its dual.
//!
//! Heavy inner loops go through [`Exec`], which dispatches to rayon when the
//! `parallel` feature is enabled and runs sequentially otherwise.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain_opt;
pub mod environments;
mod error;
mod exec;
pub mod holonomic_lp;
pub mod lagrangians;
pub mod mane_calibration;
pub mod towers;

pub use error::{Error, Result};
pub use exec::Exec;
