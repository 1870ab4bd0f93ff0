//! Ground truth by exhaustive enumeration of matchings.
//!
//! Configurations are distinguished by which site instances pair; identical
//! monomers are not quotiented out. Enumeration branches on the lowest-id
//! undecided limiting site: pair it with each available complementary site,
//! or (for [`Filter::All`]) leave it unpaired. Every complementary pair has a
//! limiting endpoint, so this reaches each matching exactly once.
//!
//! Deliberately naive: this module is what the SAT path is checked against.

use std::fmt;

use crate::error::OracleError;
use crate::model::{Configuration, SiteId, SiteRef, Tbn};

pub const DEFAULT_BOUND: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Filter {
    All,
    Saturated,
}

/// Number of matchings the enumeration will visit. Matchings of different
/// site-type pairs are independent and each pair of types `(x, x*)` forms a
/// complete bipartite graph, so the count is a product of closed forms.
pub fn estimate(t: &Tbn, filter: Filter) -> f64 {
    let mut seen = std::collections::BTreeSet::new();
    let mut total = 1.0f64;
    for st in t.limiting_site_types() {
        let comp = st.complement();
        let key = if st.is_starred() {
            comp.clone()
        } else {
            st.clone()
        };
        if !seen.insert(key) {
            continue;
        }
        let (p, q) = {
            let (a, b) = (t.count(&st), t.count(&comp));
            (a.min(b), a.max(b))
        };
        total *= match filter {
            // sum_r C(p,r) C(q,r) r!
            Filter::All => (0..=p)
                .map(|r| binomial(p, r) * binomial(q, r) * factorial(r))
                .sum::<f64>(),
            // q! / (q-p)!
            Filter::Saturated => ((q - p + 1)..=q).map(|x| x as f64).product(),
        };
    }
    total
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|x| x as f64).product()
}

fn check_bound(t: &Tbn, filter: Filter, bound: u64) -> Result<(), OracleError> {
    let est = estimate(t, filter);
    if est > bound as f64 {
        return Err(OracleError::BoundExceeded {
            estimate: est,
            bound,
        });
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Open,
    Paired,
    LeftOpen,
}

struct Walker<'t, F> {
    tbn: &'t Tbn,
    filter: Filter,
    state: Vec<Slot>,
    current: Vec<(SiteId, SiteId)>,
    visit: F,
    visited: u64,
}

impl<F: FnMut(&Configuration)> Walker<'_, F> {
    fn run(&mut self, from: usize) {
        let next = (from..self.state.len())
            .find(|&s| self.state[s] == Slot::Open && self.tbn.is_limiting_site(SiteId(s)));
        let Some(s) = next else {
            let c = Configuration::from_pairs(self.current.iter().copied());
            self.visited += 1;
            (self.visit)(&c);
            return;
        };
        self.state[s] = Slot::Paired;
        for &p in self.tbn.compatible_sites(SiteId(s)) {
            if self.state[p.0] != Slot::Open {
                continue;
            }
            self.state[p.0] = Slot::Paired;
            self.current.push((SiteId(s), p));
            self.run(s + 1);
            self.current.pop();
            self.state[p.0] = Slot::Open;
        }
        if self.filter == Filter::All {
            self.state[s] = Slot::LeftOpen;
            self.run(s + 1);
        }
        self.state[s] = Slot::Open;
    }
}

/// Streams every configuration passing `filter` to `visit`, in a fixed
/// order. Returns the number visited.
pub fn enumerate_configurations(
    t: &Tbn,
    filter: Filter,
    bound: u64,
    visit: impl FnMut(&Configuration),
) -> Result<u64, OracleError> {
    check_bound(t, filter, bound)?;
    let mut w = Walker {
        tbn: t,
        filter,
        state: vec![Slot::Open; t.site_count()],
        current: Vec::new(),
        visit,
        visited: 0,
    };
    w.run(0);
    Ok(w.visited)
}

pub fn configurations(
    t: &Tbn,
    filter: Filter,
    bound: u64,
) -> Result<Vec<Configuration>, OracleError> {
    let mut out = Vec::new();
    enumerate_configurations(t, filter, bound, |c| out.push(c.clone()))?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigSummary {
    pub pairs: Vec<(SiteRef, SiteRef)>,
    pub saturated: bool,
    pub polymers: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationReport {
    /// All valid configurations; only counted under [`Filter::All`].
    pub total: Option<u64>,
    pub saturated: u64,
    /// Saturated configurations attaining `max_polymers`.
    pub stable: u64,
    pub max_polymers: usize,
    /// The first configurations visited, up to the requested limit.
    pub configurations: Vec<ConfigSummary>,
}

impl fmt::Display for EnumerationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(total) = self.total {
            write!(f, "{total} total, ")?;
        }
        write!(
            f,
            "{} saturated, {} stable, S={}",
            self.saturated, self.stable, self.max_polymers
        )
    }
}

pub fn enumeration_report(
    t: &Tbn,
    filter: Filter,
    bound: u64,
    keep: usize,
) -> Result<EnumerationReport, OracleError> {
    let mut rep = EnumerationReport {
        total: None,
        saturated: 0,
        stable: 0,
        max_polymers: 0,
        configurations: Vec::new(),
    };
    let total = enumerate_configurations(t, filter, bound, |c| {
        let saturated = t.is_saturated(c);
        let polymers = t.polymers(c).len();
        if rep.configurations.len() < keep {
            rep.configurations.push(ConfigSummary {
                pairs: c
                    .pairs()
                    .iter()
                    .map(|&(a, b)| (t.site_ref(a), t.site_ref(b)))
                    .collect(),
                saturated,
                polymers,
            });
        }
        if !saturated {
            return;
        }
        rep.saturated += 1;
        if polymers > rep.max_polymers || rep.saturated == 1 {
            rep.max_polymers = polymers;
            rep.stable = 1;
        } else if polymers == rep.max_polymers {
            rep.stable += 1;
        }
    })?;
    if filter == Filter::All {
        rep.total = Some(total);
    }
    Ok(rep)
}

/// `(S(T), number of stable configurations)`.
pub fn oracle_stable_count(t: &Tbn, bound: u64) -> Result<(usize, u64), OracleError> {
    let r = enumeration_report(t, Filter::Saturated, bound, 0)?;
    Ok((r.max_polymers, r.stable))
}

pub fn count_saturated(t: &Tbn, bound: u64) -> Result<u64, OracleError> {
    enumerate_configurations(t, Filter::Saturated, bound, |_| {})
}

/// True iff some stable configuration leaves `m` unbound to other monomers.
pub fn oracle_stably_free(t: &Tbn, m: usize, bound: u64) -> Result<bool, OracleError> {
    if m >= t.len() {
        return Err(crate::error::ModelError::InvalidMonomer {
            id: m,
            len: t.len(),
        }
        .into());
    }
    let mut best = 0;
    let mut best_free = false;
    enumerate_configurations(t, Filter::Saturated, bound, |c| {
        let p = t.polymers(c).len();
        let free = t.is_free(c, m);
        if p > best {
            best = p;
            best_free = free;
        } else if p == best {
            best_free |= free;
        }
    })?;
    Ok(best_free)
}

/// Whether some saturated configuration has at least `k` polymers, with `m`
/// free if given.
pub fn oracle_exists(
    t: &Tbn,
    k: usize,
    free: Option<usize>,
    bound: u64,
) -> Result<bool, OracleError> {
    let mut found = false;
    enumerate_configurations(t, Filter::Saturated, bound, |c| {
        if !found && t.polymers(c).len() >= k && free.is_none_or(|m| t.is_free(c, m)) {
            found = true;
        }
    })?;
    Ok(found)
}
