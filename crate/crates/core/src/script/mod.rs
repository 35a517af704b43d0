//! PatchScript, a small deterministic language whose programs build patch
//! graphs.
//!
//! ```text
//! let f = place("cycle~", 440)
//! let out = place("ezdac~")
//! connect(f.out[0], out.in[0])
//! emit()
//! ```
//!
//! Statements end at a newline or `;`. Newlines inside `()` and `[]` are
//! ignored. `for i in a..b` is half-open, and `random(lo, hi)` draws
//! uniformly from `[lo, hi)` using a ChaCha8 stream seeded per run.

mod ast;
mod external;
mod interp;
mod parser;

use sha2::{Digest, Sha256};

pub use ast::{pretty, BinOp, Expr, Port, PortDir, Program, Stmt};
pub use external::{run_external, ExternalError, ExternalOutput, DEFAULT_TIMEOUT};
pub use interp::{run_script, MAX_LOOP_ITERATIONS, STEP_BUDGET};
pub use parser::parse_script;

use crate::ir::PatchGraph;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScriptError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl ScriptError {
    pub fn code(&self) -> &'static str {
        match self {
            ScriptError::Syntax { .. } => "syntax-error",
            ScriptError::Runtime(_) => "runtime-error",
        }
    }
}

/// Parses and runs in one go.
pub fn run_source(source: &str, seed: u64) -> Result<PatchGraph, ScriptError> {
    run_script(&parse_script(source)?, seed)
}

/// Per-sample seed: the first eight bytes (little endian) of
/// SHA-256 over `run|benchmark|index`.
pub fn sample_seed(run_id: &str, benchmark: &str, index: usize) -> u64 {
    let digest = Sha256::digest(format!("{run_id}|{benchmark}|{index}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[cfg(test)]
mod tests;
