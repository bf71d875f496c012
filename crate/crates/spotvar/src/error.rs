use std::path::PathBuf;

/// Errors surfaced by the IO layer, the pipeline and the CLI, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<AppError>,
    },
}

pub type AppResult<T> = Result<T, AppError>;

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            AppError::Stage { .. } => self,
            other => AppError::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// 2 for configuration problems, 3 for bad or unreadable data, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Data(_) | AppError::Io { .. } => 3,
            AppError::Numerical(_) => 4,
            AppError::Stage { source, .. } => source.exit_code(),
        }
    }
}

impl From<spotvar_core::Error> for AppError {
    fn from(e: spotvar_core::Error) -> Self {
        use spotvar_core::Error as E;
        match e {
            E::InvalidSeries(_)
            | E::TooShort { .. }
            | E::EmptyJoin
            | E::InvalidParameter { .. } => AppError::Data(e.to_string()),
            E::InsufficientOrder { .. }
            | E::RankDeficient { .. }
            | E::Degenerate(_)
            | E::Numerical(_) => AppError::Numerical(e.to_string()),
        }
    }
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        AppError::Data(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_innermost_cause() {
        assert_eq!(AppError::Config("x".into()).exit_code(), 2);
        let e: AppError = spotvar_core::Error::EmptyJoin.into();
        assert_eq!(e.exit_code(), 3);
        let e: AppError = spotvar_core::Error::Degenerate("flat").into();
        let staged = e.in_stage("regress").in_stage("run");
        assert_eq!(staged.exit_code(), 4);
        assert!(staged.to_string().starts_with("stage `regress` failed"));
    }
}
