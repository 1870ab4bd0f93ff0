//! Adapter for external solvers: writes DIMACS to a temporary file, runs the
//! command, parses `s`/`v` lines and re-verifies any model locally.

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use super::{SolveOutcome, SolveStats, Verdict};
use crate::encoder::{CnfInstance, Family, Lit};
use crate::error::SatError;

/// A command template such as `"kissat -q {file}"`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverCommand {
    template: String,
}

impl SolverCommand {
    pub fn parse(template: &str) -> Result<Self, SatError> {
        if template.split_whitespace().next().is_none() || !template.contains("{file}") {
            return Err(SatError::BadCommand(template.to_string()));
        }
        Ok(Self {
            template: template.to_string(),
        })
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    fn argv(&self, file: &str) -> Vec<String> {
        self.template
            .split_whitespace()
            .map(|tok| tok.replace("{file}", file))
            .collect()
    }
}

/// Solves `cnf` (plus `assumptions` as unit clauses) with an external solver.
pub fn solve_external(
    cnf: &CnfInstance,
    assumptions: &[Lit],
    cmd: &SolverCommand,
) -> Result<SolveOutcome, SatError> {
    let start = Instant::now();
    let mut full = cnf.clone();
    for &a in assumptions {
        full.push(Family::Goal, vec![a]);
    }
    let mut file = tempfile::Builder::new()
        .prefix("tbn-")
        .suffix(".cnf")
        .tempfile()?;
    file.write_all(full.to_dimacs().as_bytes())?;
    file.flush()?;
    let path = file.path().to_string_lossy().into_owned();

    let argv = cmd.argv(&path);
    let output = Command::new(&argv[0]).args(&argv[1..]).output()?;
    let stdout = String::from_utf8_lossy(&output.stdout).into_owned();
    let code = output.status.code();
    if !matches!(code, Some(0 | 10 | 20)) {
        return Err(SatError::ExitStatus {
            status: format!("{:?}", output.status),
            output: format!("{stdout}{}", String::from_utf8_lossy(&output.stderr)),
        });
    }

    let (verdict, model) = parse_competition_output(&stdout, full.num_vars())?;
    if verdict == Verdict::Sat {
        let model = model.as_ref().expect("sat carries a model");
        if let Some(clause) = full.first_falsified(model) {
            return Err(SatError::ModelVerification {
                clause,
                output: stdout,
            });
        }
    }
    Ok(SolveOutcome {
        verdict,
        model,
        stats: SolveStats {
            wall_time: start.elapsed(),
            ..SolveStats::default()
        },
    })
}

/// Parses SAT-competition output. Variables missing from `v` lines are false.
pub(crate) fn parse_competition_output(
    stdout: &str,
    num_vars: usize,
) -> Result<(Verdict, Option<Vec<bool>>), SatError> {
    let protocol = |reason: &str| SatError::Protocol {
        reason: reason.to_string(),
        output: stdout.to_string(),
    };
    let mut verdict = None;
    let mut model = vec![false; num_vars];
    let mut saw_values = false;
    for line in stdout.lines() {
        let line = line.trim();
        if let Some(status) = line.strip_prefix("s ") {
            verdict = Some(match status.trim() {
                "SATISFIABLE" => Verdict::Sat,
                "UNSATISFIABLE" => Verdict::Unsat,
                "UNKNOWN" => Verdict::Unknown,
                _ => return Err(protocol("unrecognized status line")),
            });
        } else if let Some(vals) = line.strip_prefix("v ") {
            saw_values = true;
            for tok in vals.split_whitespace() {
                let lit: i64 = tok.parse().map_err(|_| protocol("bad value literal"))?;
                if lit == 0 {
                    continue;
                }
                let v = lit.unsigned_abs() as usize;
                if v > num_vars {
                    return Err(protocol("value for unknown variable"));
                }
                model[v - 1] = lit > 0;
            }
        }
    }
    match verdict {
        Some(Verdict::Sat) if !saw_values && num_vars > 0 => {
            Err(protocol("SATISFIABLE without value lines"))
        }
        Some(Verdict::Sat) => Ok((Verdict::Sat, Some(model))),
        Some(v) => Ok((v, None)),
        None => Err(protocol("missing status line")),
    }
}
