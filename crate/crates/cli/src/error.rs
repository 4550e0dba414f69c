use hullab_core::autom::AutomError;
use hullab_core::geometry::GeometryError;
use hullab_core::hull::HullError;
use hullab_core::polybasis::PolyError;
use thiserror::Error;

/// Errors of the front end, each tied to one exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad config, or arguments outside a precondition.
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    /// The computation ran and the answer is no.
    #[error("{0}")]
    Negative(String),
    /// A numerical stage could not reach a verdict.
    #[error("failed: {0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Negative(_) | CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::Usage(m) => CliError::Usage(m),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::Usage(m) => CliError::Usage(m),
            other => CliError::Failed(other.to_string()),
        }
    }
}

fn is_usage(e: &HullError) -> bool {
    match e {
        HullError::Usage(_) | HullError::Geometry(GeometryError::Usage(_)) | HullError::Poly(PolyError::Usage(_)) => true,
        HullError::Stage { source, .. } => is_usage(source),
        _ => false,
    }
}

impl From<HullError> for CliError {
    fn from(e: HullError) -> Self {
        if is_usage(&e) {
            CliError::Usage(e.to_string())
        } else {
            CliError::Failed(e.to_string())
        }
    }
}

impl From<AutomError> for CliError {
    fn from(e: AutomError) -> Self {
        match e {
            AutomError::Usage(m) => CliError::Usage(m),
            // Points off C* x C are a mathematical answer, not a misuse.
            AutomError::Domain(m) => CliError::Negative(format!("domain error: {m}")),
            other => CliError::Failed(other.to_string()),
        }
    }
}
