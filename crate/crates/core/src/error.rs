use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Errors raised across the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid alignment error: {0}")]
    Alignment(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("infeasible: {0}")]
    Infeasible(InfeasibilityReport),

    #[error("stage `{stage}` requires missing upstream artifact `{artifact}` (run stage `{upstream}` first)")]
    MissingArtifact {
        stage: String,
        artifact: String,
        upstream: String,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Which aggregate makes a target unreachable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingConstraint {
    Capture,
    Injectivity,
    Network,
}

/// Structured diagnostic for an unreachable capture/storage target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityReport {
    pub binding: BindingConstraint,
    pub required_mt_y: f64,
    pub available_mt_y: f64,
    /// Online year of the offending period, for multi-period plans.
    pub period_year: Option<i32>,
}

impl std::fmt::Display for InfeasibilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let what = match self.binding {
            BindingConstraint::Capture => "total capturable CO2",
            BindingConstraint::Injectivity => "total sink injectivity",
            BindingConstraint::Network => "deliverable flow through the candidate network",
        };
        write!(
            f,
            "target {:.6} Mt/y exceeds {} ({:.6} Mt/y)",
            self.required_mt_y, what, self.available_mt_y
        )?;
        if let Some(y) = self.period_year {
            write!(f, " in period {y}")?;
        }
        Ok(())
    }
}
