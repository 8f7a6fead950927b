use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] htype::Error),

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("could not start the worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    /// 2 for bad input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        use htype::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                E::Domain(_) | E::InvalidParameter { .. } | E::ModelMismatch(_) | E::DegenerateBlock => 2,
                E::Overflow(_)
                | E::Quadrature { .. }
                | E::MassDeficit { .. }
                | E::ImaginaryResidual { .. }
                | E::NonFinite(_) => 3,
            },
            CliError::Csv(_) | CliError::Io(_) | CliError::Pool(_) => 2,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
