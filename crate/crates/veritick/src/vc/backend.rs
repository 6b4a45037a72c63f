//! Decision procedure backends for the implication checks.
//!
//! The built-in backend bit-blasts `antecedent /\ !consequent` and asks the
//! internal SAT solver. The external backend writes the same query as an
//! SMT-LIB script to a subprocess and believes the first `sat`/`unsat` token
//! it answers; anything else is an unknown result, which callers treat
//! conservatively.

use std::io::Write as _;
use std::process::{Command, Stdio};

use thiserror::Error;

use super::blast::Blaster;
use super::sat::SatResult;
use super::smtlib;
use super::term::Term;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckOutcome {
    Valid,
    CounterModel,
    /// The external solver answered something other than sat/unsat.
    Unknown,
}

#[derive(Debug, Error)]
#[error("external solver unavailable: {reason}")]
pub struct SolverUnavailable {
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverBackend {
    Builtin,
    /// Shell command reading an SMT-LIB script on stdin and printing
    /// sat/unsat on stdout.
    External { command: String },
}

impl SolverBackend {
    pub fn check_implication(
        &self,
        antecedent: &Term,
        consequent: &Term,
    ) -> Result<CheckOutcome, SolverUnavailable> {
        let query = Term::and(vec![antecedent.clone(), Term::not(consequent.clone())]);
        match self {
            SolverBackend::Builtin => {
                let mut b = Blaster::new();
                b.assert_true(&query);
                Ok(match b.check_sat() {
                    SatResult::Sat(_) => CheckOutcome::CounterModel,
                    SatResult::Unsat => CheckOutcome::Valid,
                })
            }
            SolverBackend::External { command } => {
                let script = smtlib::qf_script(&query);
                let answer = run_external(command, &script)?;
                match answer.as_str() {
                    "unsat" => Ok(CheckOutcome::Valid),
                    "sat" => Ok(CheckOutcome::CounterModel),
                    // No output at all: the command did not run as a solver.
                    "" => Err(SolverUnavailable {
                        reason: format!("`{command}` produced no answer"),
                    }),
                    _ => Ok(CheckOutcome::Unknown),
                }
            }
        }
    }
}

/// Feeds `input` to the command's stdin and returns the first whitespace
/// token of its stdout.
fn run_external(command: &str, input: &str) -> Result<String, SolverUnavailable> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| SolverUnavailable {
            reason: format!("failed to spawn `{command}`: {e}"),
        })?;
    child
        .stdin
        .take()
        .expect("stdin piped")
        .write_all(input.as_bytes())
        .map_err(|e| SolverUnavailable {
            reason: format!("failed to write to `{command}`: {e}"),
        })?;
    let out = child.wait_with_output().map_err(|e| SolverUnavailable {
        reason: format!("failed to wait for `{command}`: {e}"),
    })?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    Ok(stdout
        .split_whitespace()
        .next()
        .unwrap_or_default()
        .to_string())
}
