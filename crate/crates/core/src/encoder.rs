//! Compilation of TBN questions to CNF.
//!
//! Variables carry a semantic [`Role`]:
//!
//! * `Pair(s, t)`: complementary site instances `s` and `t` are paired.
//! * `Bind(p, q)`: monomers `p` and `q` are in the same polymer (closed
//!   under transitivity).
//! * `Rep(m)`: `m` is the first monomer of its polymer in the encoding order.
//! * `Sum(i, j)`: at least `j` representatives among the first `i` monomers.
//!
//! Saturation needs only at-most-one constraints per site plus one
//! at-least-one clause per limiting site. The polymer bound is a sequential
//! counter over the `Rep` variables. The counter is instantiated from a
//! virtual row `i = 0` with `Sum(0, 0)` true and `Sum(0, j)` false for
//! `j >= 1`; this yields the base clause `Sum(1, 1) -> Rep(m_1)`, without
//! which a model could claim `k` polymers with `k - 1` representatives.
//! Cells outside the feasible band are replaced by constants.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::ops::Range;

use crate::error::{EncodeError, ParseError, ParseErrorKind};
use crate::model::{Configuration, SiteId, SiteRef, Tbn};

/// A DIMACS literal: nonzero, sign is polarity, magnitude is the 1-based variable.
pub type Lit = i32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Pair(SiteRef, SiteRef),
    Bind(usize, usize),
    Rep(usize),
    /// Counter cell `(i, j)`, `i` a 1-based position in the encoding order.
    Sum(usize, usize),
    /// Auxiliary variable of the sequential at-most-one encoding.
    Aux(usize),
}

/// Which constraint family emitted a clause.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    AtMostOne,
    AtLeastOne,
    PairToBind,
    Transitivity,
    Representative,
    Counter,
    Goal,
    Free,
    Unsatisfiable,
    External,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfInstance {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    groups: Vec<(Family, Range<usize>)>,
}

impl CnfInstance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn new_var(&mut self) -> Lit {
        self.num_vars += 1;
        self.num_vars as Lit
    }

    pub fn push(&mut self, family: Family, clause: Vec<Lit>) {
        debug_assert!(!clause.is_empty(), "empty clause");
        debug_assert!(clause
            .iter()
            .all(|&l| l != 0 && l.unsigned_abs() as usize <= self.num_vars));
        let at = self.clauses.len();
        self.clauses.push(clause);
        match self.groups.last_mut() {
            Some((f, range)) if *f == family => range.end = at + 1,
            _ => self.groups.push((family, at..at + 1)),
        }
    }

    /// Clause index ranges tagged with the family that produced them.
    pub fn groups(&self) -> &[(Family, Range<usize>)] {
        &self.groups
    }

    pub fn count_family(&self, family: Family) -> usize {
        self.groups
            .iter()
            .filter(|(f, _)| *f == family)
            .map(|(_, r)| r.len())
            .sum()
    }

    /// Unsatisfiable without an empty clause: a fresh `x` with `x` and `!x`.
    pub fn push_contradiction(&mut self) {
        let x = self.new_var();
        self.push(Family::Unsatisfiable, vec![x]);
        self.push(Family::Unsatisfiable, vec![-x]);
    }

    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        self.first_falsified(model).is_none()
    }

    /// Index of the first clause falsified by `model` (indexed by variable - 1).
    pub fn first_falsified(&self, model: &[bool]) -> Option<usize> {
        self.clauses.iter().position(|c| {
            !c.iter().any(|&l| {
                let v = l.unsigned_abs() as usize - 1;
                v < model.len() && model[v] == (l > 0)
            })
        })
    }

    /// Standard DIMACS text without a legend.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        self.write_body(&mut out);
        out
    }

    fn write_body(&self, out: &mut String) {
        let _ = writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(out, "{l} ");
            }
            out.push_str("0\n");
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AmoEncoding {
    #[default]
    Pairwise,
    /// Sinz's sequential encoding with `|C(s)| - 1` auxiliaries per site.
    Sequential,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum MonomerOrder {
    #[default]
    Input,
    Reverse,
    /// `order[i]` is the monomer at position `i`.
    Explicit(Vec<usize>),
}

#[derive(Clone, Debug, Default)]
pub struct EncodeOptions {
    pub amo: AmoEncoding,
    pub order: MonomerOrder,
    /// Drop clauses identical (as literal sets) to one already emitted.
    pub dedup: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cell {
    True,
    False,
    Var(Lit),
}

#[derive(Clone, Debug)]
struct Counter {
    width: usize,
    target: Option<usize>,
    cells: HashMap<(usize, usize), Lit>,
}

/// Bidirectional map between SAT variables and their semantic roles.
#[derive(Clone, Debug, Default)]
pub struct VarMap {
    roles: Vec<Role>,
    pair: HashMap<(SiteId, SiteId), Lit>,
    pair_list: Vec<(Lit, SiteId, SiteId)>,
    monomers: usize,
    bind: Vec<Lit>,
    rep: Vec<Lit>,
    order: Vec<usize>,
    counter: Option<Counter>,
    aux_count: usize,
}

impl VarMap {
    pub fn role(&self, var: Lit) -> Option<Role> {
        let v = var.unsigned_abs() as usize;
        (v >= 1).then(|| self.roles.get(v - 1).copied()).flatten()
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn pair(&self, s: SiteId, t: SiteId) -> Option<Lit> {
        let key = if s <= t { (s, t) } else { (t, s) };
        self.pair.get(&key).copied()
    }

    pub fn pair_count(&self) -> usize {
        self.pair_list.len()
    }

    pub fn bind(&self, p: usize, q: usize) -> Option<Lit> {
        if self.bind.is_empty() || p == q || p >= self.monomers || q >= self.monomers {
            return None;
        }
        let (p, q) = if p < q { (p, q) } else { (q, p) };
        Some(self.bind[tri_index(self.monomers, p, q)])
    }

    pub fn rep(&self, m: usize) -> Option<Lit> {
        self.rep.get(m).copied()
    }

    /// Counter variable `Sum(i, j)` if it lies inside the allocated band.
    pub fn sum(&self, i: usize, j: usize) -> Option<Lit> {
        self.counter.as_ref()?.cells.get(&(i, j)).copied()
    }

    pub fn sum_count(&self) -> usize {
        self.counter.as_ref().map_or(0, |c| c.cells.len())
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    fn alloc(&mut self, cnf: &mut CnfInstance, role: Role) -> Lit {
        let v = cnf.new_var();
        self.roles.push(role);
        debug_assert_eq!(self.roles.len(), cnf.num_vars());
        v
    }

    fn cell(&self, i: usize, j: usize) -> Cell {
        let c = self.counter.as_ref().expect("counter allocated");
        if j == 0 {
            return Cell::True;
        }
        if j > i || j > c.width {
            return Cell::False;
        }
        let n = self.order.len();
        if let Some(k) = c.target {
            if j + (n - i) < k {
                return Cell::True;
            }
        }
        Cell::Var(c.cells[&(i, j)])
    }
}

fn tri_index(n: usize, p: usize, q: usize) -> usize {
    debug_assert!(p < q && q < n);
    p * (2 * n - p - 1) / 2 + (q - p - 1)
}

/// A CNF instance together with the meaning of its variables.
#[derive(Clone, Debug, Default)]
pub struct Encoding {
    pub cnf: CnfInstance,
    pub vars: VarMap,
    dedup: Option<std::collections::HashSet<Vec<Lit>>>,
}

/// Result of adding a polymer bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundStatus {
    Encoded,
    /// `k` exceeds the number of monomers; a contradiction was emitted.
    Unsatisfiable,
}

/// Pair variables, at-most-one per site and at-least-one per limiting site.
/// Satisfying assignments correspond exactly to saturated configurations.
pub fn encode_saturation(t: &Tbn, opts: &EncodeOptions) -> Encoding {
    let mut enc = Encoding {
        dedup: opts.dedup.then(Default::default),
        ..Default::default()
    };
    enc.vars.monomers = t.len();
    enc.vars.order = match &opts.order {
        MonomerOrder::Input => (0..t.len()).collect(),
        MonomerOrder::Reverse => (0..t.len()).rev().collect(),
        MonomerOrder::Explicit(o) => {
            let mut check = o.clone();
            check.sort_unstable();
            assert!(
                check == (0..t.len()).collect::<Vec<_>>(),
                "explicit order must be a permutation of the monomers"
            );
            o.clone()
        }
    };

    for (s, u) in t.complementary_pairs() {
        let v = enc
            .vars
            .alloc(&mut enc.cnf, Role::Pair(t.site_ref(s), t.site_ref(u)));
        enc.vars.pair.insert((s, u), v);
        enc.vars.pair_list.push((v, s, u));
    }

    for s in (0..t.site_count()).map(SiteId) {
        let lits: Vec<Lit> = t
            .compatible_sites(s)
            .iter()
            .map(|&u| enc.vars.pair(s, u).expect("pair allocated"))
            .collect();
        match opts.amo {
            AmoEncoding::Pairwise => {
                for a in 0..lits.len() {
                    for b in a + 1..lits.len() {
                        enc.emit(Family::AtMostOne, vec![-lits[a], -lits[b]]);
                    }
                }
            }
            AmoEncoding::Sequential => enc.sequential_amo(&lits),
        }
    }

    for s in (0..t.site_count()).map(SiteId) {
        if t.is_limiting_site(s) {
            let lits: Vec<Lit> = t
                .compatible_sites(s)
                .iter()
                .map(|&u| enc.vars.pair(s, u).expect("pair allocated"))
                .collect();
            assert!(!lits.is_empty(), "limiting site without complement");
            enc.emit(Family::AtLeastOne, lits);
        }
    }
    enc
}

/// Adds binding, transitivity, representatives and a counter of width `k`
/// with a unit goal `Sum(n, k)`. The formula is then satisfiable iff some
/// saturated configuration has at least `k` polymers.
pub fn encode_polymer_count(
    t: &Tbn,
    k: usize,
    enc: &mut Encoding,
) -> Result<BoundStatus, EncodeError> {
    if k == 0 {
        return Err(EncodeError::InvalidBound(k));
    }
    if k > t.len() {
        enc.cnf.push_contradiction();
        return Ok(BoundStatus::Unsatisfiable);
    }
    enc.add_binding(t);
    enc.add_counter(k, Some(k));
    let goal = enc.goal_literal(k).expect("goal inside band");
    enc.emit(Family::Goal, vec![goal]);
    Ok(BoundStatus::Encoded)
}

/// Forbids every inter-monomer pair touching `m`. Pairs between two sites of
/// `m` itself stay unconstrained.
pub fn encode_monomer_free(t: &Tbn, m: usize, enc: &mut Encoding) -> Result<(), EncodeError> {
    for lit in free_assumptions(t, m, &enc.vars)? {
        enc.emit(Family::Free, vec![lit]);
    }
    Ok(())
}

/// The literals that hold exactly when `m` is free, for use as assumptions.
pub fn free_assumptions(t: &Tbn, m: usize, vars: &VarMap) -> Result<Vec<Lit>, EncodeError> {
    if m >= t.len() {
        return Err(EncodeError::InvalidMonomer(m));
    }
    let mut out = Vec::new();
    for s in t.sites_of(m) {
        for &u in t.compatible_sites(s) {
            if t.monomer_of(u) != m {
                out.push(-vars.pair(s, u).expect("pair allocated"));
            }
        }
    }
    Ok(out)
}

impl Encoding {
    fn emit(&mut self, family: Family, mut clause: Vec<Lit>) {
        if let Some(seen) = &mut self.dedup {
            let mut key = clause.clone();
            key.sort_unstable();
            key.dedup();
            if !seen.insert(key) {
                return;
            }
        }
        clause.shrink_to_fit();
        self.cnf.push(family, clause);
    }

    fn sequential_amo(&mut self, lits: &[Lit]) {
        let m = lits.len();
        if m < 2 {
            return;
        }
        let aux: Vec<Lit> = (0..m - 1)
            .map(|_| {
                let id = self.vars.aux_count;
                self.vars.aux_count += 1;
                self.vars.alloc(&mut self.cnf, Role::Aux(id))
            })
            .collect();
        self.emit(Family::AtMostOne, vec![-lits[0], aux[0]]);
        for i in 1..m - 1 {
            self.emit(Family::AtMostOne, vec![-lits[i], aux[i]]);
            self.emit(Family::AtMostOne, vec![-aux[i - 1], aux[i]]);
            self.emit(Family::AtMostOne, vec![-lits[i], -aux[i - 1]]);
        }
        self.emit(Family::AtMostOne, vec![-lits[m - 1], -aux[m - 2]]);
    }

    /// Pair-to-bind implications, transitivity over all monomer triples and
    /// the representative clauses. Idempotent.
    pub fn add_binding(&mut self, t: &Tbn) {
        if !self.vars.rep.is_empty() || t.is_empty() {
            return;
        }
        let n = t.len();
        for p in 0..n {
            for q in p + 1..n {
                let v = self.vars.alloc(&mut self.cnf, Role::Bind(p, q));
                self.vars.bind.push(v);
            }
        }
        for m in 0..n {
            let v = self.vars.alloc(&mut self.cnf, Role::Rep(m));
            self.vars.rep.push(v);
        }

        let pairs = self.vars.pair_list.clone();
        for (v, s, u) in pairs {
            let (p, q) = (t.monomer_of(s), t.monomer_of(u));
            if p != q {
                let b = self.vars.bind(p, q).expect("bind allocated");
                self.emit(Family::PairToBind, vec![-v, b]);
            }
        }

        for p in 0..n {
            for q in p + 1..n {
                let pq = self.vars.bind(p, q).expect("bind");
                for r in q + 1..n {
                    let pr = self.vars.bind(p, r).expect("bind");
                    let qr = self.vars.bind(q, r).expect("bind");
                    self.emit(Family::Transitivity, vec![-pq, -pr, qr]);
                    self.emit(Family::Transitivity, vec![-pq, -qr, pr]);
                    self.emit(Family::Transitivity, vec![-pr, -qr, pq]);
                }
            }
        }

        let order = self.vars.order.clone();
        for a in 0..n {
            for b in a + 1..n {
                let (p, q) = (order[a], order[b]);
                let bind = self.vars.bind(p, q).expect("bind");
                let rep = self.vars.rep[q];
                self.emit(Family::Representative, vec![-bind, -rep]);
            }
        }
    }

    /// Allocates the counter grid of the given width. With a `target`, cells
    /// that any model reaching `Sum(n, target)` must set true are replaced by
    /// the constant true; with `None` the same grid serves every goal up to
    /// `width` via assumptions.
    pub fn add_counter(&mut self, width: usize, target: Option<usize>) {
        assert!(self.vars.counter.is_none(), "counter already allocated");
        let n = self.vars.order.len();
        assert!(width <= n && target.is_none_or(|k| k <= width));
        let mut cells = HashMap::new();
        let mut roles = Vec::new();
        for i in 1..=n {
            let lo = target.map_or(1, |k| k.saturating_sub(n - i).max(1));
            for j in lo..=i.min(width) {
                let v = self.cnf.new_var();
                roles.push(Role::Sum(i, j));
                cells.insert((i, j), v);
            }
        }
        self.vars.roles.extend(roles);
        self.vars.counter = Some(Counter {
            width,
            target,
            cells,
        });

        for i in 0..n {
            let rep = self.vars.rep[self.vars.order[i]];
            for j in 0..=width {
                if j < width {
                    // !Sum(i, j) -> !Sum(i+1, j+1)
                    let a = self.vars.cell(i, j);
                    let b = self.vars.cell(i + 1, j + 1);
                    self.emit_cells(&[(a, true), (b, false)], None);
                }
                if j >= 1 {
                    // !Sum(i, j) & Sum(i+1, j) -> Rep(m_{i+1})
                    let a = self.vars.cell(i, j);
                    let b = self.vars.cell(i + 1, j);
                    self.emit_cells(&[(a, true), (b, false)], Some(rep));
                }
            }
        }
    }

    fn emit_cells(&mut self, cells: &[(Cell, bool)], extra: Option<Lit>) {
        let mut clause = Vec::with_capacity(3);
        for &(cell, positive) in cells {
            match (cell, positive) {
                (Cell::True, true) | (Cell::False, false) => return,
                (Cell::True, false) | (Cell::False, true) => {}
                (Cell::Var(v), true) => clause.push(v),
                (Cell::Var(v), false) => clause.push(-v),
            }
        }
        clause.extend(extra);
        if clause.is_empty() {
            self.cnf.push_contradiction();
        } else {
            self.emit(Family::Counter, clause);
        }
    }

    /// The literal asserting at least `k` representatives, if the counter
    /// can express it.
    pub fn goal_literal(&self, k: usize) -> Option<Lit> {
        let n = self.vars.order.len();
        match self.vars.cell(n, k) {
            Cell::Var(v) => Some(v),
            _ => None,
        }
    }

    /// DIMACS text with the variable legend as `c var` comment lines.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::from("c tbn-encoding v1\n");
        if !self.vars.order.is_empty() {
            out.push_str("c order");
            for m in &self.vars.order {
                let _ = write!(out, " {m}");
            }
            out.push('\n');
        }
        for (i, role) in self.vars.roles.iter().enumerate() {
            let _ = write!(out, "c var {} ", i + 1);
            let _ = match role {
                Role::Pair(a, b) => writeln!(out, "PAIR {a} {b}"),
                Role::Bind(p, q) => writeln!(out, "BIND {p} {q}"),
                Role::Rep(m) => writeln!(out, "REP {m}"),
                Role::Sum(i, j) => writeln!(out, "SUM {i} {j}"),
                Role::Aux(a) => writeln!(out, "AUX {a}"),
            };
        }
        self.cnf.write_body(&mut out);
        out
    }
}

/// Reads the configuration off a model (indexed by variable - 1): exactly the
/// `Pair` variables set true. Fails if the result is not a valid saturated
/// configuration, which would mean the encoding is wrong.
pub fn decode_model(t: &Tbn, vars: &VarMap, model: &[bool]) -> Result<Configuration, EncodeError> {
    let mut c = Configuration::new();
    for &(v, s, u) in &vars.pair_list {
        let idx = v as usize - 1;
        if idx >= model.len() {
            return Err(EncodeError::ShortModel(v as usize));
        }
        if model[idx] {
            c.insert(s, u);
        }
    }
    if !t.is_valid_configuration(&c) {
        return Err(EncodeError::Decode("a valid matching"));
    }
    if !t.is_saturated(&c) {
        return Err(EncodeError::Decode("saturated"));
    }
    Ok(c)
}

/// A DIMACS file with whatever legend it carried.
#[derive(Clone, Debug, Default)]
pub struct DimacsFile {
    pub cnf: CnfInstance,
    pub legend: Vec<(Lit, Role)>,
}

/// Parses DIMACS CNF, including `c var` legend lines when present.
pub fn parse_dimacs(text: &str) -> Result<DimacsFile, ParseError> {
    let mut file = DimacsFile::default();
    let mut declared: Option<(usize, usize)> = None;
    let mut pending: Vec<Lit> = Vec::new();
    let mut raw_clauses = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let bad = |msg: String| ParseError {
            line: line_no,
            kind: ParseErrorKind::Dimacs(msg),
        };
        let line = line.trim();
        if line.is_empty() || line == "%" {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.first() == Some(&"var") {
                file.legend
                    .push(parse_legend(&toks[1..]).ok_or_else(|| bad(line.into()))?);
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            match toks.as_slice() {
                ["cnf", v, c] => {
                    let v = v.parse().map_err(|_| bad(format!("bad header `{line}`")))?;
                    let c = c.parse().map_err(|_| bad(format!("bad header `{line}`")))?;
                    declared = Some((v, c));
                }
                _ => return Err(bad(format!("bad header `{line}`"))),
            }
            continue;
        }
        let (vars, _) = declared.ok_or_else(|| bad("clause before header".into()))?;
        for tok in line.split_whitespace() {
            let lit: Lit = tok
                .parse()
                .map_err(|_| bad(format!("bad literal `{tok}`")))?;
            if lit == 0 {
                raw_clauses.push(std::mem::take(&mut pending));
            } else {
                if lit.unsigned_abs() as usize > vars {
                    return Err(bad(format!("literal {lit} exceeds {vars} variables")));
                }
                pending.push(lit);
            }
        }
    }
    let (vars, count) = declared.ok_or(ParseError {
        line: 0,
        kind: ParseErrorKind::Dimacs("missing `p cnf` header".into()),
    })?;
    if !pending.is_empty() {
        raw_clauses.push(pending);
    }
    if raw_clauses.len() != count {
        return Err(ParseError {
            line: 0,
            kind: ParseErrorKind::Dimacs(format!(
                "header declares {count} clauses, found {}",
                raw_clauses.len()
            )),
        });
    }
    file.cnf.num_vars = vars;
    for c in raw_clauses {
        if c.is_empty() {
            // An explicit empty clause: keep the instance unsatisfiable.
            file.cnf.push_contradiction();
        } else {
            file.cnf.push(Family::External, c);
        }
    }
    Ok(file)
}

fn parse_legend(toks: &[&str]) -> Option<(Lit, Role)> {
    let var: Lit = toks.first()?.parse().ok()?;
    let num = |i: usize| toks.get(i).and_then(|s| s.parse::<usize>().ok());
    let role = match *toks.get(1)? {
        "PAIR" => Role::Pair(toks.get(2)?.parse().ok()?, toks.get(3)?.parse().ok()?),
        "BIND" => Role::Bind(num(2)?, num(3)?),
        "REP" => Role::Rep(num(2)?),
        "SUM" => Role::Sum(num(2)?, num(3)?),
        "AUX" => Role::Aux(num(2)?),
        _ => return None,
    };
    Some((var, role))
}
