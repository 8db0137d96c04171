use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration or usage; the message names the offending field.
    #[error("{0}")]
    Config(String),
    /// The inputs are valid but the quantity asked for does not exist.
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// Attach a config field path to a simulator error and classify it.
    pub fn config(field: &str, err: spingate::Error) -> Self {
        use spingate::Error as E;
        let msg = format!("{field}: {err}");
        match err {
            E::DegenerateFidelity
            | E::ZeroSuccessProbability
            | E::ZeroNormRegister
            | E::InvalidTrace(_) => CliError::Numerical(msg),
            _ => CliError::Config(msg),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
            CliError::Io(_) => ExitCode::from(1),
        }
    }
}
