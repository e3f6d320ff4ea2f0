use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("self-loop on vertex {vertex}{}", at_line(*.line))]
    SelfLoop { vertex: VertexId, line: Option<usize> },

    #[error("duplicate edge ({u}, {v}){}", at_line(*.line))]
    DuplicateEdge {
        u: VertexId,
        v: VertexId,
        line: Option<usize>,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),
}

fn at_line(line: Option<usize>) -> String {
    line.map(|l| format!(" at line {l}")).unwrap_or_default()
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

/// Checks that `x` is a probability in `(0, 1]`.
pub(crate) fn check_probability(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must lie in (0, 1], got {x}")))
    }
}
