//! Four-stroke quantum Otto engine with a coupled two-level-system pair as
//! the working medium.
//!
//! The working medium is a pair of spins with Hamiltonian H = ω(t)·B₁ + J·B₂,
//! where ω(t) is the external control field and J the internal coupling. The
//! cycle alternates two *isochores* (constant ω, weak coupling to a hot/cold
//! bath, solved in closed form) with two *adiabats* (time-dependent ω, unitary
//! evolution, solved numerically and via an exact Wei-Norman propagator for a
//! special ω(t)).
//!
//! Module map:
//! - [`algebra`] — the five-operator basis, Hamiltonian and eigensystem
//! - [`lindblad`] — jump operators and a dense master-equation oracle
//! - [`bloch`] — reduced dynamics of the five expectation values
//! - [`adiabat`] — unitary propagation under time-dependent ω(t)
//! - [`thermo`] — state reconstruction, entropies, temperature, heat/work
//! - [`cycle`] — Otto cycle composition, limit cycle, sweeps, optimization
//! - [`validate`] — the self-check battery behind `otto validate`
//!
//! Units: ħ = k_B = 1 throughout; every quantity is dimensionless.

// index loops mirror the matrix formulas; negated comparisons reject NaN
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabat;
pub mod algebra;
pub mod bloch;
pub mod cycle;
mod error;
pub mod linalg;
pub mod lindblad;
pub mod thermo;
pub mod validate;

pub use error::OttoError;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, OttoError>;
