use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or precondition was violated.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The state became non-finite, or a singular configuration was hit.
    #[error("blow-up at step {step}: {context}")]
    BlowUp { step: u64, context: String },

    /// The model does not expose what the operation needs (e.g. a potential).
    #[error("unsupported model '{model}': {reason}")]
    UnsupportedModel { model: String, reason: String },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn blow_up(context: impl Into<String>) -> Self {
        Error::BlowUp {
            step: 0,
            context: context.into(),
        }
    }

    /// Attach the step index to a blow-up raised deep inside a kernel.
    pub fn at_step(self, step: u64) -> Self {
        match self {
            Error::BlowUp { context, .. } => Error::BlowUp { step, context },
            other => other,
        }
    }

    pub fn is_blow_up(&self) -> bool {
        matches!(self, Error::BlowUp { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
