use serde::Serialize;

/// One rejected scenario field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldIssue {
    pub field: String,
    pub message: String,
}

impl FieldIssue {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        FieldIssue {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid scenario: {}", summarize(.0))]
    Validation(Vec<FieldIssue>),
    #[error("{context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: pr_filtration::Error,
    },
    #[error("self-check failed: {}", .0.join(", "))]
    SelfCheck(Vec<String>),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn summarize(issues: &[FieldIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("{}: {}", i.field, i.message))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
struct ErrorReport<'a> {
    status: &'static str,
    kind: &'static str,
    exit_code: i32,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    issues: Option<&'a [FieldIssue]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failed_checks: Option<&'a [String]>,
}

impl CliError {
    pub fn solver(context: impl Into<String>, source: pr_filtration::Error) -> Self {
        CliError::Solver {
            context: context.into(),
            source,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Solver { .. } => "solver",
            CliError::SelfCheck(_) => "selfcheck",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver { .. } | CliError::Io { .. } => 3,
            CliError::SelfCheck(_) => 4,
        }
    }

    /// Single-line JSON error report.
    pub fn to_json(&self) -> String {
        let report = ErrorReport {
            status: "error",
            kind: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
            issues: match self {
                CliError::Validation(v) => Some(v),
                _ => None,
            },
            failed_checks: match self {
                CliError::SelfCheck(v) => Some(v),
                _ => None,
            },
        };
        serde_json::to_string(&report).expect("error report serializes")
    }
}
