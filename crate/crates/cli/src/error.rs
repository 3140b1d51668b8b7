use std::fmt;

/// Failure of a CLI run. `Display` is the single machine-parsable line
/// printed on stderr: `error[<kind>] <detail>`.
#[derive(Debug)]
pub enum CliError {
    /// Every violated constraint, each as `field: constraint`.
    Validation(Vec<String>),
    /// The config is not well-formed JSON for the schema.
    Parse(String),
    Io {
        path: String,
        message: String,
    },
    /// A model rejected its inputs at run time.
    Model(swarmlink::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, err: impl fmt::Display) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Parse(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Model(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let line = match self {
            CliError::Validation(v) => format!("error[validation] {}", v.join("; ")),
            CliError::Parse(m) => format!("error[parse] {m}"),
            CliError::Io { path, message } => format!("error[io] {path}: {message}"),
            CliError::Model(e) => format!("error[model] {e}"),
        };
        f.write_str(&line.replace('\n', " "))
    }
}

impl std::error::Error for CliError {}

impl From<swarmlink::Error> for CliError {
    fn from(e: swarmlink::Error) -> Self {
        CliError::Model(e)
    }
}
