//! Library side of the `boolnet` experiment runner.

use std::fmt;

pub mod config;
pub mod experiments;
pub mod output;
pub mod selftest;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad config, parse or validation failure.
    Config(String),
    /// A numerical routine failed at run time.
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) => 3,
            Self::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Numeric(m) => write!(f, "numeric error: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
