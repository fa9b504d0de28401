//! Random Hermitian matrices whose entries form an infinitely divisible
//! (in particular α-stable) random vector.
//!
//! The crate covers the whole pipeline needed to check concentration
//! inequalities for spectral functionals numerically:
//!
//! - [`levy`]: Lévy measures built from atoms and stable components, and the
//!   scalar functionals (V², ν̄, M, h, H, h⁻¹, p_γ, E_γ, x₀) the bounds consume.
//! - [`sampler`]: exact draws of `ID(β, 0, ν)` vectors with deterministic streams.
//! - [`ensemble`]: the map from an entry vector to the Hermitian matrix `X_A`.
//! - [`spectra`]: a Householder + implicit QL eigensolver, spectral functionals
//!   and the Lipschitz test functions used in the proofs.
//! - [`bounds`]: every closed-form tail bound as a [`bounds::BoundCurve`].
//! - [`reference_laws`]: semicircle and Marčenko–Pastur laws.
//! - [`metrics`]: W₁, the bounded-Lipschitz distance, tail and median estimators.
//! - [`experiments`]: Monte-Carlo verification runs and verdicts.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod document;
pub mod ensemble;
pub mod experiments;
pub mod levy;
pub mod metrics;
pub mod quad;
pub mod rate;
pub mod reference_laws;
pub mod roots;
pub mod sampler;
pub mod spectra;

mod error;

pub use error::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;
