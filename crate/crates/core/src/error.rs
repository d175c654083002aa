use thiserror::Error;

/// Errors surfaced by the engine library.
#[derive(Debug, Clone, Error)]
pub enum OttoError {
    /// ω = J = 0: the Hamiltonian vanishes and the eigensystem is undefined.
    #[error("degenerate field point (omega = J = 0)")]
    DegenerateField,

    #[error("invalid bath parameters: {0}")]
    InvalidBath(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A reconstructed probability fell below the tolerance floor.
    #[error("unphysical state: {0}")]
    UnphysicalState(String),

    /// Entropy rate denominator within tolerance of zero; reported, not masked.
    #[error("dynamical temperature undefined (entropy rate {0:.3e})")]
    UndefinedTemperature(f64),

    /// |⟨L₊⟩| too small for the phase angle to mean anything.
    #[error("phase undefined (modulus {0:.3e})")]
    PhaseUndefined(f64),

    #[error("schedule violation: {0}")]
    ScheduleViolation(String),

    /// An arcsin/arccos argument left [-1, 1] beyond numerical slack.
    #[error("domain violation: {0}")]
    DomainViolation(String),

    /// The analytic ω(t) is singular at t = 0.
    #[error("singularity: {0}")]
    Singularity(String),

    #[error("cycle not closed: corner mismatch {residual:.3e} exceeds {tolerance:.3e}")]
    NotClosed { residual: f64, tolerance: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
}
