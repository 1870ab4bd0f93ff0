//! Satisfiability back ends: the embedded CDCL solver and an adapter for
//! external DIMACS solvers speaking the SAT-competition output protocol.

mod cdcl;
mod external;

use std::time::Duration;

pub use cdcl::Solver;
pub use external::{solve_external, SolverCommand};

use crate::encoder::{CnfInstance, Lit};
use crate::error::SatError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    /// Resource budget exhausted.
    Unknown,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub wall_time: Duration,
}

impl SolveStats {
    fn delta(&self, before: &SolveStats) -> SolveStats {
        SolveStats {
            decisions: self.decisions - before.decisions,
            conflicts: self.conflicts - before.conflicts,
            propagations: self.propagations - before.propagations,
            restarts: self.restarts - before.restarts,
            wall_time: Duration::ZERO,
        }
    }

    pub fn accumulate(&mut self, other: &SolveStats) {
        self.decisions += other.decisions;
        self.conflicts += other.conflicts;
        self.propagations += other.propagations;
        self.restarts += other.restarts;
        self.wall_time += other.wall_time;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub verdict: Verdict,
    /// Truth value per variable (index = variable - 1), present iff SAT.
    pub model: Option<Vec<bool>>,
    pub stats: SolveStats,
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        self.verdict == Verdict::Sat
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    /// Conflicts allowed per solve call before answering `Unknown`.
    pub max_conflicts: Option<u64>,
    pub time_limit: Option<Duration>,
    /// Seeds decision tie-breaking; equal seeds give equal models.
    pub seed: u64,
}

pub const DEFAULT_CONFLICT_BUDGET: u64 = 1_000_000;

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_conflicts: Some(DEFAULT_CONFLICT_BUDGET),
            time_limit: None,
            seed: 0,
        }
    }
}

/// One-shot solve with the embedded solver.
pub fn solve(
    cnf: &CnfInstance,
    assumptions: &[Lit],
    config: &SolverConfig,
) -> Result<SolveOutcome, SatError> {
    let mut solver = Solver::from_cnf(cnf, config.clone());
    let mut out = solver.solve_with(assumptions)?;
    if let Some(model) = &mut out.model {
        model.resize(cnf.num_vars(), false);
    }
    Ok(out)
}
