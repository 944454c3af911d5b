use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: bpr_core::Error,
    },

    #[error(transparent)]
    Core(#[from] bpr_core::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;

fn core_exit(e: &bpr_core::Error) -> u8 {
    use bpr_core::Error as E;
    match e {
        E::Io(_) | E::Format(_) => 3,
        E::InvalidParams(_) => 2,
        _ => 1,
    }
}

impl BenchError {
    /// 0 success, 1 solver failure, 2 invalid config, 3 I/O.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            BenchError::Config(_) => 2,
            BenchError::Trial { source, .. } | BenchError::Core(source) => core_exit(source),
            BenchError::Io(_) | BenchError::Json(_) => 3,
        })
    }
}
