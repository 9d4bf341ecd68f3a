use thiserror::Error;

/// Errors raised by the geometry, field, quadrature and index routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VolError {
    #[error("colatitude {theta} lies outside the pole guard band [{eps}, pi - {eps}]")]
    PoleDomain { theta: f64, eps: f64 },

    #[error("longitude {phi} is on or beyond the removed meridian of a slit-domain field")]
    SlitDomain { phi: f64 },

    #[error("field is not defined on the whole circle of latitude (slit domain)")]
    SlitCircle,

    #[error("vector ({a}, {b}) is not unit (norm {norm})")]
    NonUnit { a: f64, b: f64, norm: f64 },

    #[error("loxodrome left the guarded domain at theta = {theta} before reaching the transversal")]
    FlowEscape { theta: f64 },

    #[error("ODE integration failed: {0}")]
    Ode(String),

    #[error("finite-difference step {step} is below the usable minimum {min}")]
    StepUnderflow { step: f64, min: f64 },

    #[error("quadrature did not converge: estimate {estimate:e} exceeds budget {budget:e}")]
    NonConvergence { estimate: f64, budget: f64 },

    #[error("angle unwrapping failed at theta = {theta} after {doublings} refinements")]
    UnwrapFailure { theta: f64, doublings: u32 },

    #[error("winding limit {value} is not within {tol} of an integer")]
    NonIntegerWinding { value: f64, tol: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = VolError> = std::result::Result<T, E>;

impl VolError {
    /// True for errors caused by evaluating outside a field's or chart's domain.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            VolError::PoleDomain { .. }
                | VolError::SlitDomain { .. }
                | VolError::SlitCircle
                | VolError::FlowEscape { .. }
                | VolError::NonUnit { .. }
                | VolError::Invalid(_)
        )
    }
}
