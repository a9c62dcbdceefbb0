use std::fmt;

use thiserror::Error;

use crate::model::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoutingError {
    #[error("robot {0} is not covered by any FRS")]
    Uncovered(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("a Sub-FRS was already spawned under {0}")]
    AlreadySpawned(NodeId),
    #[error("no link between {0} and {1}")]
    MissingLink(NodeId, NodeId),
    #[error("fog node {0} has no link to a cloud region")]
    NoUpstreamCloud(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigIssue {
    Syntax { line: usize, message: String },
    Validation { field: String, reason: String },
}

impl ConfigIssue {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigIssue::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigIssue::Syntax { line, message } => {
                write!(f, "syntax error at line {line}: {message}")
            }
            ConfigIssue::Validation { field, reason } => write!(f, "invalid {field}: {reason}"),
        }
    }
}

/// Every problem found in a scenario, not only the first.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl ConfigError {
    pub fn single(issue: ConfigIssue) -> Self {
        ConfigError {
            issues: vec![issue],
        }
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.issues.iter().any(|i| i.to_string().contains(needle))
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error:\n{0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
}
