use serde::Serialize;
use thiserror::Error;

use rydberg_shaping::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Convergence(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    exit_code: i32,
    message: String,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Convergence(_) => "convergence",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    /// Single-line JSON written to stderr.
    pub fn to_json(&self) -> String {
        let report =
            ErrorReport { error: ErrorBody { kind: self.kind(), exit_code: self.exit_code(), message: self.to_string() } };
        serde_json::to_string(&report).expect("error report serializes")
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NoConvergence { .. } | CoreError::Unstable { .. } | CoreError::NonHermitian(_) => {
                CliError::Convergence(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_exit_codes() {
        assert_eq!(CliError::from(CoreError::NoConvergence { iterations: 3, residual: 1.0 }).exit_code(), 3);
        assert_eq!(CliError::from(CoreError::Unstable { mode: 0, eigenvalue: -1.0 }).exit_code(), 3);
        assert_eq!(CliError::from(CoreError::InvalidParameter("x".into())).exit_code(), 2);
        assert_eq!(CliError::Io("disk".into()).exit_code(), 4);
    }

    #[test]
    fn report_is_json() {
        let v: serde_json::Value = serde_json::from_str(&CliError::Validation("bad".into()).to_json()).unwrap();
        assert_eq!(v["error"]["kind"], "validation");
        assert_eq!(v["error"]["exit_code"], 2);
    }
}
