//! Independent references for the integration tests. Nothing here calls the
//! library's solver, encoder or enumeration code; the TBN type is used only
//! as a container of monomers and sites.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tbn_core::{Monomer, SiteType, Tbn};

pub fn corpus(name: &str) -> Tbn {
    let path = corpus_dir().join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    tbn_core::parse_tbn(&text).unwrap()
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random TBN with at most `max_monomers` monomers, at most `max_sites`
/// sites overall and at most four distinct site types.
pub fn random_tbn(r: &mut impl Rng, max_monomers: usize, max_sites: usize) -> Tbn {
    let pool = ["a", "a*", "b", "b*", "c", "c*"];
    let mut types: Vec<&str> = pool.to_vec();
    let k = r.gen_range(1..=4);
    for i in 0..k {
        let j = r.gen_range(i..types.len());
        types.swap(i, j);
    }
    types.truncate(k);
    let n = r.gen_range(1..=max_monomers);
    let mut budget = max_sites.max(n);
    let mut monomers = Vec::new();
    for i in 0..n {
        let left = n - i - 1;
        let cap = (budget - left).min(4);
        let len = r.gen_range(1..=cap);
        budget -= len;
        let sites = (0..len)
            .map(|_| {
                types[r.gen_range(0..types.len())]
                    .parse::<SiteType>()
                    .unwrap()
            })
            .collect();
        monomers.push(Monomer::new(sites));
    }
    Tbn::new(monomers).unwrap()
}

/// Site instance list: `(monomer, name, starred)`.
fn sites(t: &Tbn) -> Vec<(usize, String, bool)> {
    t.monomers()
        .iter()
        .enumerate()
        .flat_map(|(m, mono)| {
            mono.sites
                .iter()
                .map(move |s| (m, s.name().to_string(), s.is_starred()))
        })
        .collect()
}

/// One matching: pairs of global site indices.
pub type Matching = Vec<(usize, usize)>;

/// Every maximal matching, found by letting each site in turn either stay
/// unpaired or pair with a later compatible site, then discarding
/// non-maximal results.
pub fn maximal_matchings(t: &Tbn) -> Vec<Matching> {
    let s = sites(t);
    let compatible = |a: usize, b: usize| s[a].1 == s[b].1 && s[a].2 != s[b].2;
    let mut used = vec![false; s.len()];
    let mut cur = Vec::new();
    let mut out = Vec::new();
    fn go(
        i: usize,
        used: &mut Vec<bool>,
        cur: &mut Matching,
        out: &mut Vec<Matching>,
        compatible: &dyn Fn(usize, usize) -> bool,
    ) {
        let n = used.len();
        if i == n {
            let maximal =
                (0..n).all(|a| used[a] || (a + 1..n).all(|b| used[b] || !compatible(a, b)));
            if maximal {
                out.push(cur.clone());
            }
            return;
        }
        if used[i] {
            return go(i + 1, used, cur, out, compatible);
        }
        go(i + 1, used, cur, out, compatible);
        for j in i + 1..n {
            if !used[j] && compatible(i, j) {
                used[i] = true;
                used[j] = true;
                cur.push((i, j));
                go(i + 1, used, cur, out, compatible);
                cur.pop();
                used[i] = false;
                used[j] = false;
            }
        }
    }
    go(0, &mut used, &mut cur, &mut out, &compatible);
    out
}

/// Monomer-level components of a matching, by depth-first search.
pub fn components(t: &Tbn, m: &Matching) -> Vec<usize> {
    let s = sites(t);
    let n = t.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in m {
        let (p, q) = (s[a].0, s[b].0);
        adj[p].push(q);
        adj[q].push(p);
    }
    let mut comp = vec![usize::MAX; n];
    let mut c = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = c;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = c;
                    stack.push(w);
                }
            }
        }
        c += 1;
    }
    comp
}

pub fn polymer_count(t: &Tbn, m: &Matching) -> usize {
    components(t, m).into_iter().collect::<BTreeSet<_>>().len()
}

pub fn is_free(t: &Tbn, m: &Matching, monomer: usize) -> bool {
    let s = sites(t);
    m.iter().all(|&(a, b)| {
        let (p, q) = (s[a].0, s[b].0);
        p == q || (p != monomer && q != monomer)
    })
}

/// Reference answers for one TBN.
pub struct Reference {
    pub stable_count: usize,
    /// Largest polymer count over saturated configurations leaving monomer i free.
    pub best_free: Vec<Option<usize>>,
    pub saturated: usize,
}

impl Reference {
    pub fn new(t: &Tbn) -> Self {
        let ms = maximal_matchings(t);
        let mut stable_count = 0;
        let mut best_free = vec![None; t.len()];
        for m in &ms {
            let p = polymer_count(t, m);
            stable_count = stable_count.max(p);
            for (i, slot) in best_free.iter_mut().enumerate() {
                if is_free(t, m, i) {
                    *slot = Some(slot.map_or(p, |b: usize| b.max(p)));
                }
            }
        }
        Self {
            stable_count,
            best_free,
            saturated: ms.len(),
        }
    }

    pub fn exists(&self, k: usize, free: Option<usize>) -> bool {
        match free {
            None => k <= self.stable_count,
            Some(m) => self.best_free[m].is_some_and(|b| b >= k),
        }
    }

    pub fn stably_free(&self, m: usize) -> bool {
        self.best_free[m] == Some(self.stable_count)
    }
}

/// Tiny complete DPLL over DIMACS-style clauses.
pub fn dpll_sat(num_vars: usize, clauses: &[Vec<i32>], fixed: &[i32]) -> bool {
    let mut assign: Vec<Option<bool>> = vec![None; num_vars + 1];
    for &l in fixed {
        let v = l.unsigned_abs() as usize;
        if assign[v] == Some(l < 0) {
            return false;
        }
        assign[v] = Some(l > 0);
    }
    fn value(assign: &[Option<bool>], l: i32) -> Option<bool> {
        assign[l.unsigned_abs() as usize].map(|b| b == (l > 0))
    }
    fn go(assign: &mut [Option<bool>], clauses: &[Vec<i32>]) -> bool {
        loop {
            let mut unit = None;
            for c in clauses {
                let mut open = None;
                let mut n_open = 0;
                let mut sat = false;
                for &l in c {
                    match value(assign, l) {
                        Some(true) => {
                            sat = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            n_open += 1;
                            open = Some(l);
                        }
                    }
                }
                if sat {
                    continue;
                }
                match n_open {
                    0 => return false,
                    1 => {
                        unit = open;
                        break;
                    }
                    _ => {}
                }
            }
            match unit {
                Some(l) => assign[l.unsigned_abs() as usize] = Some(l > 0),
                None => break,
            }
        }
        let Some(v) = (1..assign.len()).find(|&v| assign[v].is_none()) else {
            return true;
        };
        for b in [true, false] {
            let mut next = assign.to_vec();
            next[v] = Some(b);
            if go(&mut next, clauses) {
                return true;
            }
        }
        false
    }
    go(&mut assign, clauses)
}

/// Satisfiability by trying every assignment, 64 at a time: bit `b` of
/// word `w` stands for the assignment `w * 64 + b`.
pub fn truth_table_sat(num_vars: usize, clauses: &[Vec<i32>]) -> bool {
    const LOW: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    let words = 1u64 << num_vars.saturating_sub(6);
    let valid = if num_vars >= 6 {
        u64::MAX
    } else {
        (1u64 << (1 << num_vars)) - 1
    };
    (0..words).any(|w| {
        let var = |v: usize| -> u64 {
            if v < 6 {
                LOW[v]
            } else if w >> (v - 6) & 1 == 1 {
                u64::MAX
            } else {
                0
            }
        };
        let mut alive = valid;
        for c in clauses {
            let mut sat = 0u64;
            for &l in c {
                let x = var(l.unsigned_abs() as usize - 1);
                sat |= if l > 0 { x } else { !x };
            }
            alive &= sat;
            if alive == 0 {
                return false;
            }
        }
        alive != 0
    })
}

pub fn random_3cnf(r: &mut impl Rng, max_vars: usize) -> (usize, Vec<Vec<i32>>) {
    let n = r.gen_range(3..=max_vars);
    // Around the satisfiability threshold so both verdicts occur.
    let m = (n as f64 * r.gen_range(3.0..5.5)) as usize;
    let clauses = (0..m)
        .map(|_| {
            (0..3)
                .map(|_| {
                    let v = r.gen_range(1..=n as i32);
                    if r.gen_bool(0.5) {
                        v
                    } else {
                        -v
                    }
                })
                .collect()
        })
        .collect();
    (n, clauses)
}

/// Maximum independent set size and, per vertex, whether it lies in some
/// maximum independent set.
pub fn mis_brute(n: usize, edges: &[(usize, usize)]) -> (usize, Vec<bool>) {
    let independent = |mask: u32| {
        edges
            .iter()
            .all(|&(a, b)| mask >> a & 1 == 0 || mask >> b & 1 == 0)
    };
    let best = (0u32..1 << n)
        .filter(|&m| independent(m))
        .map(u32::count_ones)
        .max()
        .unwrap_or(0) as usize;
    let mut member = vec![false; n];
    for mask in (0u32..1 << n).filter(|&m| independent(m) && m.count_ones() as usize == best) {
        for (v, slot) in member.iter_mut().enumerate() {
            *slot |= mask >> v & 1 == 1;
        }
    }
    (best, member)
}

/// Per vertex, whether it lies in some minimum vertex cover.
pub fn min_vc_members(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let cover = |mask: u32| {
        edges
            .iter()
            .all(|&(a, b)| mask >> a & 1 == 1 || mask >> b & 1 == 1)
    };
    let best = (0u32..1 << n)
        .filter(|&m| cover(m))
        .map(u32::count_ones)
        .min()
        .unwrap();
    let mut member = vec![false; n];
    for mask in (0u32..1 << n).filter(|&m| cover(m) && m.count_ones() == best) {
        for (v, slot) in member.iter_mut().enumerate() {
            *slot |= mask >> v & 1 == 1;
        }
    }
    member
}

/// All connected simple graphs on `n` labeled vertices with at least one edge.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let all: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    for mask in 1u32..1 << all.len() {
        let edges: Vec<(usize, usize)> = all
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        if seen.iter().all(|&s| s) {
            out.push(edges);
        }
    }
    out
}

/// Whether some subfamily of `sets` partitions their union.
pub fn has_exact_cover(sets: &[BTreeSet<String>]) -> bool {
    let universe: BTreeSet<&String> = sets.iter().flatten().collect();
    (1u32..1 << sets.len()).any(|mask| {
        let chosen: Vec<&BTreeSet<String>> = sets
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, s)| s)
            .collect();
        let total: usize = chosen.iter().map(|s| s.len()).sum();
        let union: BTreeSet<&String> = chosen.iter().copied().flatten().collect();
        total == union.len() && union == universe
    })
}

pub fn random_exact_cover(r: &mut impl Rng) -> Vec<Vec<String>> {
    let elements = ["p", "q", "r", "s", "t"];
    // Three or four sets over four or five elements: roughly balanced
    // between instances with and without an exact cover.
    let universe = r.gen_range(4..=5);
    let sets = r.gen_range(3..=4);
    (0..sets)
        .map(|_| {
            let mut set: Vec<String> = elements[..universe]
                .iter()
                .filter(|_| r.gen_bool(0.5))
                .map(|e| e.to_string())
                .collect();
            if set.is_empty() {
                set.push(elements[r.gen_range(0..universe)].to_string());
            }
            set
        })
        .collect()
}
