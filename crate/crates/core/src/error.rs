use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which edge of a validity domain was crossed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    VMin,
    VMax,
    XMin,
    XMax,
    HMin,
    HMax,
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Bound::VMin => "v_min",
            Bound::VMax => "v_max",
            Bound::XMin => "x_min",
            Bound::XMax => "x_max",
            Bound::HMin => "h_min",
            Bound::HMax => "h_max",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{bound} violated: value {value} outside [{lo}, {hi}]")]
    Domain {
        bound: Bound,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("hyperbolicity lost at v={v}, x={x}: {what}")]
    Hyperbolicity { v: f64, x: f64, what: String },
    #[error("model error: {0}")]
    Model(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("solution left the admissible set at node {node} (t={t}): {reason}")]
    DomainExit {
        node: usize,
        t: f64,
        reason: String,
    },
    #[error("non-finite value at node {node} (t={t})")]
    Numerical { node: usize, t: f64 },
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("{}", join_config(.0))]
    Config(Vec<ConfigError>),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn join_config(errs: &[ConfigError]) -> String {
    errs.iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
