use crate::config::Diagnostic;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{source_name}: {} validation finding(s)", diagnostics.len())]
    Invalid {
        source_name: String,
        diagnostics: Vec<Diagnostic>,
    },

    #[error(transparent)]
    Core(#[from] rydssh::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2: configuration or input; 3: numerical failure; 4: resource ceiling.
    pub fn exit_code(&self) -> u8 {
        use rydssh::Error as E;
        match self {
            CliError::Core(E::Resource(_)) => 4,
            CliError::Core(
                E::Numerical(_)
                | E::Fit(_)
                | E::Ambiguity(_)
                | E::NotSymmetric(_)
                | E::InconsistentRepresentation(_),
            ) => 3,
            _ => 2,
        }
    }
}
