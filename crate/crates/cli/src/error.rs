//! Exit-code classification: configuration problems exit 2, solver
//! breakdowns exit 3.

#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub source: anyhow::Error,
}

impl CliError {
    pub fn config(source: anyhow::Error) -> Self {
        Self {
            exit_code: 2,
            source,
        }
    }

    pub fn solver(source: anyhow::Error) -> Self {
        Self {
            exit_code: 3,
            source,
        }
    }
}

pub fn config_error(source: anyhow::Error) -> CliError {
    CliError::config(source)
}

/// Runtime breakdowns of an otherwise valid run exit 3; everything else is
/// a configuration problem.
pub fn from_core(err: fracstep::Error) -> CliError {
    use fracstep::Error;
    match err {
        Error::NewtonDivergence { .. }
        | Error::NegativityHalt { .. }
        | Error::NonFiniteState { .. }
        | Error::DecompositionViolation { .. }
        | Error::SingularJacobian(_) => CliError::solver(err.into()),
        _ => CliError::config(err.into()),
    }
}
