//! Decision procedures on top of the encoder and the SAT back ends.
//!
//! * [`saturated_config_exists`]: is there a saturated configuration with at
//!   least `k` polymers (optionally with a given monomer free)?
//! * [`stable_polymer_count`]: the largest such `k`, with a stable witness.
//! * [`can_be_free`], [`stably_free`], [`stably_free_direct`] and
//!   [`stably_free_batch`] for the stably-free question.
//!
//! The default search is a binary search over `k` on one incremental solver
//! per TBN: the counter is built once for every bound up to `n` and the goal
//! `Sum(n, k)` is passed as an assumption, so learnt clauses carry over.

use std::fmt;
use std::time::{Duration, Instant};

use crate::encoder::{
    decode_model, encode_monomer_free, encode_polymer_count, encode_saturation, free_assumptions,
    BoundStatus, EncodeOptions, Encoding,
};
use crate::error::{EncodeError, ModelError, QueryError};
use crate::model::{Configuration, Tbn};
use crate::par::{self, Parallelism};
use crate::sat::{self, SolveOutcome, SolveStats, Solver, SolverCommand, SolverConfig, Verdict};

#[derive(Clone, Debug)]
pub enum Backend {
    Embedded(SolverConfig),
    External(SolverCommand),
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Embedded(SolverConfig::default())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SearchMode {
    /// Binary search over the polymer bound.
    #[default]
    Binary,
    /// Every bound `1..=n` queried independently, in parallel when enabled.
    Batch,
}

#[derive(Clone, Debug)]
pub struct QueryOptions {
    pub backend: Backend,
    pub encode: EncodeOptions,
    pub search: SearchMode,
    /// Reuse one embedded solver across bounds via assumptions. Ignored by
    /// the external back end, which always receives a fresh instance.
    pub incremental: bool,
    pub parallelism: Parallelism,
}

impl Default for QueryOptions {
    fn default() -> Self {
        Self {
            backend: Backend::default(),
            encode: EncodeOptions::default(),
            search: SearchMode::default(),
            incremental: true,
            parallelism: Parallelism::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    SingleQuery,
    BinarySearch,
    Batch,
    TwoQuery,
    Direct,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::SingleQuery => "single-query",
            Method::BinarySearch => "binary-search",
            Method::Batch => "batch",
            Method::TwoQuery => "two-query",
            Method::Direct => "direct",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct QueryStats {
    pub solver_calls: u64,
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub wall_time: Duration,
}

impl QueryStats {
    fn record(&mut self, s: &SolveStats) {
        self.solver_calls += 1;
        self.decisions += s.decisions;
        self.conflicts += s.conflicts;
        self.propagations += s.propagations;
    }

    fn merge(&mut self, other: &QueryStats) {
        self.solver_calls += other.solver_calls;
        self.decisions += other.decisions;
        self.conflicts += other.conflicts;
        self.propagations += other.propagations;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult {
    /// `S(T)`: polymers in a stable configuration.
    pub stable_polymer_count: usize,
    /// The bound of a single existence query; `stable_polymer_count` then
    /// holds the witness's polymer count (0 without a witness).
    pub min_polymers: Option<usize>,
    /// The queried monomer, for stably-free queries.
    pub monomer: Option<usize>,
    pub free_verdict: Option<bool>,
    pub witness: Option<Configuration>,
    pub method: Method,
    pub stats: QueryStats,
}

/// Query state for one TBN. Holds the incremental solver when enabled.
pub struct Session<'a> {
    tbn: &'a Tbn,
    opts: &'a QueryOptions,
    incremental: Option<(Encoding, Solver)>,
    stats: QueryStats,
}

impl<'a> Session<'a> {
    pub fn new(tbn: &'a Tbn, opts: &'a QueryOptions) -> Self {
        Self {
            tbn,
            opts,
            incremental: None,
            stats: QueryStats::default(),
        }
    }

    pub fn stats(&self) -> &QueryStats {
        &self.stats
    }

    /// Some saturated configuration with at least `k` polymers (and `free`
    /// unbound, if given), or `None` if the solver proves there is none.
    pub fn exists(
        &mut self,
        k: usize,
        free: Option<usize>,
    ) -> Result<Option<Configuration>, QueryError> {
        if k == 0 {
            return Err(EncodeError::InvalidBound(k).into());
        }
        if let Some(m) = free {
            check_monomer(self.tbn, m)?;
        }
        let n = self.tbn.len();
        if k > n {
            return Ok(None);
        }
        let (outcome, witness) = match (&self.opts.backend, self.opts.incremental) {
            (Backend::Embedded(cfg), true) => self.exists_incremental(cfg, k, free)?,
            _ => self.exists_fresh(k, free)?,
        };
        self.stats.record(&outcome.stats);
        match outcome.verdict {
            Verdict::Unknown => Err(QueryError::Unknown),
            Verdict::Unsat => Ok(None),
            Verdict::Sat => {
                let w = witness.expect("sat outcome decoded");
                let polymers = self.tbn.polymers(&w).len();
                if polymers < k {
                    return Err(QueryError::Internal(format!(
                        "witness has {polymers} polymers, fewer than the bound {k}"
                    )));
                }
                if let Some(m) = free {
                    if !self.tbn.is_free(&w, m) {
                        return Err(QueryError::Internal(format!(
                            "monomer {m} is bound in a witness required to leave it free"
                        )));
                    }
                }
                Ok(Some(w))
            }
        }
    }

    fn exists_incremental(
        &mut self,
        cfg: &SolverConfig,
        k: usize,
        free: Option<usize>,
    ) -> Result<(SolveOutcome, Option<Configuration>), QueryError> {
        let tbn = self.tbn;
        let (enc, solver) = self.incremental.get_or_insert_with(|| {
            let mut enc = encode_saturation(tbn, &self.opts.encode);
            enc.add_binding(tbn);
            enc.add_counter(tbn.len(), None);
            let solver = Solver::from_cnf(&enc.cnf, cfg.clone());
            (enc, solver)
        });
        let mut assumptions = vec![enc.goal_literal(k).expect("counter covers 1..=n")];
        if let Some(m) = free {
            assumptions.extend(free_assumptions(tbn, m, &enc.vars)?);
        }
        let outcome = solver.solve_with(&assumptions)?;
        let witness = match &outcome.model {
            Some(model) => Some(decode_model(tbn, &enc.vars, model)?),
            None => None,
        };
        Ok((outcome, witness))
    }

    fn exists_fresh(
        &mut self,
        k: usize,
        free: Option<usize>,
    ) -> Result<(SolveOutcome, Option<Configuration>), QueryError> {
        let enc = encode_query(self.tbn, k, free, &self.opts.encode)?;
        let outcome = match &self.opts.backend {
            Backend::Embedded(cfg) => sat::solve(&enc.cnf, &[], cfg)?,
            Backend::External(cmd) => sat::solve_external(&enc.cnf, &[], cmd)?,
        };
        let witness = match &outcome.model {
            Some(model) => Some(decode_model(self.tbn, &enc.vars, model)?),
            None => None,
        };
        Ok((outcome, witness))
    }

    /// `S(T)` with a stable witness, by binary search over the bound.
    pub fn stable_count(&mut self) -> Result<(usize, Configuration), QueryError> {
        let n = self.tbn.len();
        if n == 0 {
            return Ok((0, Configuration::new()));
        }
        let mut witness = self
            .exists(1, None)?
            .ok_or_else(|| QueryError::Internal("no saturated configuration found".into()))?;
        let mut lo = self.tbn.polymers(&witness).len();
        let mut hi = n;
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            match self.exists(mid, None)? {
                Some(w) => {
                    lo = self.tbn.polymers(&w).len();
                    witness = w;
                }
                None => hi = mid - 1,
            }
        }
        Ok((lo, witness))
    }
}

/// The CNF for one existence query: saturation, a polymer bound `k` and
/// optionally the free-monomer units.
pub fn encode_query(
    t: &Tbn,
    k: usize,
    free: Option<usize>,
    opts: &EncodeOptions,
) -> Result<Encoding, EncodeError> {
    let mut enc = encode_saturation(t, opts);
    if encode_polymer_count(t, k, &mut enc)? == BoundStatus::Unsatisfiable {
        return Ok(enc);
    }
    if let Some(m) = free {
        encode_monomer_free(t, m, &mut enc)?;
    }
    Ok(enc)
}

fn check_monomer(t: &Tbn, m: usize) -> Result<(), QueryError> {
    if m >= t.len() {
        return Err(ModelError::InvalidMonomer {
            id: m,
            len: t.len(),
        }
        .into());
    }
    Ok(())
}

pub fn saturated_config_exists(
    t: &Tbn,
    k: usize,
    free: Option<usize>,
    opts: &QueryOptions,
) -> Result<Option<Configuration>, QueryError> {
    Session::new(t, opts).exists(k, free)
}

/// One existence query for at least `k` polymers, as a [`QueryResult`].
pub fn min_polymers_query(
    t: &Tbn,
    k: usize,
    free: Option<usize>,
    opts: &QueryOptions,
) -> Result<QueryResult, QueryError> {
    let start = Instant::now();
    let mut session = Session::new(t, opts);
    let witness = session.exists(k, free)?;
    let mut stats = session.stats.clone();
    stats.wall_time = start.elapsed();
    Ok(QueryResult {
        stable_polymer_count: witness.as_ref().map_or(0, |w| t.polymers(w).len()),
        min_polymers: Some(k),
        monomer: free,
        free_verdict: free.map(|_| witness.is_some()),
        witness,
        method: Method::SingleQuery,
        stats,
    })
}

/// `S(T)` and a stable configuration. The empty TBN has `S = 0`.
pub fn stable_polymer_count(t: &Tbn, opts: &QueryOptions) -> Result<QueryResult, QueryError> {
    let start = Instant::now();
    let (count, witness, mut stats, method) = match opts.search {
        SearchMode::Binary => {
            let mut session = Session::new(t, opts);
            let (s, w) = session.stable_count()?;
            (s, w, session.stats.clone(), Method::BinarySearch)
        }
        SearchMode::Batch => {
            let (s, w, st) = batch_stable_count(t, opts)?;
            (s, w, st, Method::Batch)
        }
    };
    stats.wall_time = start.elapsed();
    Ok(QueryResult {
        stable_polymer_count: count,
        min_polymers: None,
        monomer: None,
        free_verdict: None,
        witness: Some(witness),
        method,
        stats,
    })
}

fn batch_stable_count(
    t: &Tbn,
    opts: &QueryOptions,
) -> Result<(usize, Configuration, QueryStats), QueryError> {
    if t.is_empty() {
        return Ok((0, Configuration::new(), QueryStats::default()));
    }
    let fresh = QueryOptions {
        incremental: false,
        ..opts.clone()
    };
    let answers = par::map(opts.parallelism, (1..=t.len()).collect(), |k| {
        let mut s = Session::new(t, &fresh);
        s.exists(k, None).map(|w| (w, s.stats))
    });
    let mut stats = QueryStats::default();
    let mut found = Vec::with_capacity(answers.len());
    for a in answers {
        let (w, st) = a?;
        stats.merge(&st);
        found.push(w);
    }
    let best = found
        .iter()
        .rposition(Option::is_some)
        .ok_or_else(|| QueryError::Internal("no saturated configuration found".into()))?;
    if found[..best].iter().any(Option::is_none) {
        return Err(QueryError::Internal(
            "existence is not monotone in the polymer bound".into(),
        ));
    }
    let witness = found.swap_remove(best).expect("checked");
    Ok((best + 1, witness, stats))
}

/// Sufficient condition for `m` to be free in some saturated configuration:
/// `m` cannot pair with itself, and every complement of a site type on `m`
/// occurs outside `m` no more often than that type does outside `m`. Then
/// any saturated configuration of the rest stays saturated with `m` added
/// unbound.
pub fn free_without_search(t: &Tbn, m: usize) -> bool {
    let mono = t.monomer(m);
    if mono.is_self_complementary() {
        return false;
    }
    mono.sites.iter().all(|st| {
        let on_m = mono.sites.iter().filter(|x| *x == st).count();
        let comp = st.complement();
        t.count(&comp) <= t.count(st) - on_m
    })
}

/// Whether `m` is free in some saturated configuration. The negative answer
/// always comes from the solver.
pub fn can_be_free(t: &Tbn, m: usize, opts: &QueryOptions) -> Result<bool, QueryError> {
    check_monomer(t, m)?;
    if free_without_search(t, m) {
        return Ok(true);
    }
    Ok(Session::new(t, opts).exists(1, Some(m))?.is_some())
}

/// Stably-free via the two-query characterization: `m` is stably free iff it
/// can be free and `S(T - m) >= S(T) - 1`.
pub fn stably_free(t: &Tbn, m: usize, opts: &QueryOptions) -> Result<QueryResult, QueryError> {
    check_monomer(t, m)?;
    let start = Instant::now();
    let mut session = Session::new(t, opts);
    let (s, stable_witness) = session.stable_count()?;
    let free_possible = free_without_search(t, m) || session.exists(1, Some(m))?.is_some();
    let mut stats = session.stats.clone();

    let verdict = if free_possible {
        let rest = t.remove_monomer(m)?;
        let mut rest_session = Session::new(&rest, opts);
        let (s_rest, _) = rest_session.stable_count()?;
        stats.merge(&rest_session.stats);
        s_rest + 1 >= s
    } else {
        false
    };

    let witness = if verdict {
        let before = session.stats.clone();
        let w = session.exists(s, Some(m))?.ok_or_else(|| {
            QueryError::Internal(format!(
                "monomer {m} judged stably free but no stable witness leaves it free"
            ))
        })?;
        let mut delta = session.stats.clone();
        delta.solver_calls -= before.solver_calls;
        delta.decisions -= before.decisions;
        delta.conflicts -= before.conflicts;
        delta.propagations -= before.propagations;
        stats.merge(&delta);
        w
    } else {
        stable_witness
    };
    stats.wall_time = start.elapsed();
    Ok(QueryResult {
        stable_polymer_count: s,
        min_polymers: None,
        monomer: Some(m),
        free_verdict: Some(verdict),
        witness: Some(witness),
        method: Method::TwoQuery,
        stats,
    })
}

/// Stably-free directly: compute `S(T)`, then ask for a configuration with
/// `S(T)` polymers and `m` free.
pub fn stably_free_direct(
    t: &Tbn,
    m: usize,
    opts: &QueryOptions,
) -> Result<QueryResult, QueryError> {
    check_monomer(t, m)?;
    let start = Instant::now();
    let mut session = Session::new(t, opts);
    let (s, stable_witness) = session.stable_count()?;
    let free_witness = session.exists(s, Some(m))?;
    let mut stats = session.stats.clone();
    stats.wall_time = start.elapsed();
    Ok(QueryResult {
        stable_polymer_count: s,
        min_polymers: None,
        monomer: Some(m),
        free_verdict: Some(free_witness.is_some()),
        witness: Some(free_witness.unwrap_or(stable_witness)),
        method: Method::Direct,
        stats,
    })
}

/// Stably-free from one parallel round of queries: `A(k)` and `F(k)` for
/// every `k` in `1..=n`. `m` is not stably free iff some `k` has `A(k)` but
/// not `F(k)`.
pub fn stably_free_batch(
    t: &Tbn,
    m: usize,
    opts: &QueryOptions,
) -> Result<QueryResult, QueryError> {
    check_monomer(t, m)?;
    let start = Instant::now();
    let fresh = QueryOptions {
        incremental: false,
        ..opts.clone()
    };
    let n = t.len();
    let jobs: Vec<(usize, Option<usize>)> =
        (1..=n).flat_map(|k| [(k, None), (k, Some(m))]).collect();
    let answers = par::map(opts.parallelism, jobs, |(k, free)| {
        let mut s = Session::new(t, &fresh);
        s.exists(k, free).map(|w| (w, s.stats))
    });
    let mut stats = QueryStats::default();
    let mut any = Vec::with_capacity(n);
    let mut with_free = Vec::with_capacity(n);
    for (i, a) in answers.into_iter().enumerate() {
        let (w, st) = a?;
        stats.merge(&st);
        if i % 2 == 0 {
            any.push(w);
        } else {
            with_free.push(w);
        }
    }
    let best = any
        .iter()
        .rposition(Option::is_some)
        .ok_or_else(|| QueryError::Internal("no saturated configuration found".into()))?;
    let verdict = !(0..n).any(|i| any[i].is_some() && with_free[i].is_none());
    let witness = if verdict {
        with_free.swap_remove(best)
    } else {
        any.swap_remove(best)
    }
    .expect("witness at the stable bound");
    stats.wall_time = start.elapsed();
    Ok(QueryResult {
        stable_polymer_count: best + 1,
        min_polymers: None,
        monomer: Some(m),
        free_verdict: Some(verdict),
        witness: Some(witness),
        method: Method::Batch,
        stats,
    })
}
