//! Conflict-driven clause learning solver.
//!
//! Two watched literals with blocker literals, first-UIP learning with
//! local minimization, VSIDS decisions with phase saving, Luby restarts and
//! activity-based deletion of learnt clauses. Solving under assumptions
//! keeps learnt clauses across calls.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SolveOutcome, SolveStats, SolverConfig, Verdict};
use crate::encoder::{CnfInstance, Lit as DimacsLit};
use crate::error::SatError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Lit(u32);

impl Lit {
    fn from_dimacs(l: DimacsLit) -> Self {
        let v = l.unsigned_abs() - 1;
        Lit(v << 1 | u32::from(l < 0))
    }

    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    fn negative(self) -> bool {
        self.0 & 1 == 1
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

#[derive(Clone, Copy)]
struct Watch {
    clause: u32,
    blocker: Lit,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    removed: bool,
    activity: f64,
}

/// Max-heap of variables keyed by activity.
#[derive(Default)]
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn grow(&mut self, n: usize) {
        self.pos.resize(n, None);
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v].is_some()
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        self.pos[v] = Some(self.heap.len() - 1);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn bumped(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.pos[v] {
            self.sift_up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if act[self.heap[parent]] >= act[v] {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i]] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r]] > act[self.heap[l]] {
                r
            } else {
                l
            };
            if act[self.heap[c]] <= act[v] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i]] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }
}

/// Incremental CDCL solver over DIMACS-numbered variables.
pub struct Solver {
    config: SolverConfig,
    rng: ChaCha8Rng,
    ok: bool,
    original: Vec<Vec<DimacsLit>>,
    clauses: Vec<Clause>,
    learnt_count: usize,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    phase: Vec<bool>,
    activity: Vec<f64>,
    heap: VarHeap,
    var_inc: f64,
    cla_inc: f64,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    max_learnts: f64,
    stats: SolveStats,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self {
            config,
            rng,
            ok: true,
            original: Vec::new(),
            clauses: Vec::new(),
            learnt_count: 0,
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            phase: Vec::new(),
            activity: Vec::new(),
            heap: VarHeap::default(),
            var_inc: 1.0,
            cla_inc: 1.0,
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: Vec::new(),
            max_learnts: 0.0,
            stats: SolveStats::default(),
        }
    }

    pub fn from_cnf(cnf: &CnfInstance, config: SolverConfig) -> Self {
        let mut s = Self::new(config);
        s.reserve_vars(cnf.num_vars());
        for c in cnf.clauses() {
            s.add_clause(c);
        }
        s
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    /// Cumulative statistics over every call on this solver.
    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    pub fn reserve_vars(&mut self, n: usize) {
        while self.assigns.len() < n {
            let v = self.assigns.len();
            self.assigns.push(UNDEF);
            self.level.push(0);
            self.reason.push(None);
            self.phase.push(false);
            // Seeded jitter breaks activity ties reproducibly.
            self.activity.push(self.rng.gen::<f64>() * 1e-6);
            self.seen.push(false);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
            self.heap.grow(v + 1);
            self.heap.insert(v, &self.activity);
        }
    }

    fn value(&self, l: Lit) -> i8 {
        let a = self.assigns[l.var()];
        if l.negative() {
            -a
        } else {
            a
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause between solves. Returns false once the formula is
    /// known to be unsatisfiable.
    pub fn add_clause(&mut self, dimacs: &[DimacsLit]) -> bool {
        assert_eq!(self.decision_level(), 0);
        if let Some(max) = dimacs.iter().map(|l| l.unsigned_abs() as usize).max() {
            self.reserve_vars(max);
        }
        self.original.push(dimacs.to_vec());
        if !self.ok {
            return false;
        }
        let mut lits: Vec<Lit> = dimacs.iter().map(|&l| Lit::from_dimacs(l)).collect();
        lits.sort_unstable_by_key(|l| l.0);
        lits.dedup();
        let mut out = Vec::with_capacity(lits.len());
        for (i, &l) in lits.iter().enumerate() {
            if i + 1 < lits.len() && lits[i + 1] == !l {
                return true; // tautology
            }
            match self.value(l) {
                TRUE => return true,
                FALSE => {}
                _ => out.push(l),
            }
        }
        match out.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(out[0], None);
                self.ok = self.propagate().is_none();
                self.ok
            }
            _ => {
                self.attach(out, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].index()].push(Watch {
            clause: cref,
            blocker: lits[1],
        });
        self.watches[lits[1].index()].push(Watch {
            clause: cref,
            blocker: lits[0],
        });
        if learnt {
            self.learnt_count += 1;
        }
        self.clauses.push(Clause {
            lits,
            learnt,
            removed: false,
            activity: 0.0,
        });
        cref
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        let v = l.var();
        debug_assert_eq!(self.assigns[v], UNDEF);
        self.assigns[v] = if l.negative() { FALSE } else { TRUE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns a conflicting clause if one is found.
    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.index()]);
            let (mut i, mut j) = (0, 0);
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.clause as usize;
                if self.clauses[cref].removed {
                    continue;
                }
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                if first != w.blocker && self.value(first) == TRUE {
                    ws[j] = Watch {
                        clause: w.clause,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[cref].lits[k];
                    if self.value(l) != FALSE {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[l.index()].push(Watch {
                            clause: w.clause,
                            blocker: first,
                        });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = w;
                j += 1;
                if self.value(first) == FALSE {
                    conflict = Some(w.clause);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                    self.qhead = self.trail.len();
                } else {
                    self.enqueue(first, Some(w.clause));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.index()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity);
    }

    fn bump_clause(&mut self, c: usize) {
        self.clauses[c].activity += self.cla_inc;
        if self.clauses[c].activity > 1e20 {
            for cl in self.clauses.iter_mut().filter(|c| c.learnt) {
                cl.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit(0)];
        let mut pending = 0;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        loop {
            let c = confl as usize;
            if self.clauses[c].learnt {
                self.bump_clause(c);
            }
            let start = usize::from(p.is_some());
            for k in start..self.clauses[c].lits.len() {
                let q = self.clauses[c].lits[k];
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= self.decision_level() {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] {
                    break;
                }
            }
            let lit = self.trail[index];
            self.seen[lit.var()] = false;
            pending -= 1;
            p = Some(lit);
            if pending == 0 {
                break;
            }
            confl = self.reason[lit.var()].expect("implied literal has a reason");
            // Reason clauses keep the implied literal first.
            debug_assert_eq!(self.clauses[confl as usize].lits[0], lit);
        }
        learnt[0] = !p.expect("conflict at non-zero level");

        // Local minimization: drop literals implied by other learnt literals.
        let keep: Vec<bool> = learnt
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                i == 0
                    || match self.reason[l.var()] {
                        None => true,
                        Some(r) => self.clauses[r as usize].lits[1..]
                            .iter()
                            .any(|q| !self.seen[q.var()] && self.level[q.var()] > 0),
                    }
            })
            .collect();
        for l in &learnt[1..] {
            self.seen[l.var()] = false;
        }
        let mut learnt: Vec<Lit> = learnt
            .into_iter()
            .zip(keep)
            .filter_map(|(l, k)| k.then_some(l))
            .collect();

        let back = if learnt.len() == 1 {
            0
        } else {
            let (best, _) = learnt
                .iter()
                .enumerate()
                .skip(1)
                .max_by_key(|(_, l)| self.level[l.var()])
                .expect("len > 1");
            learnt.swap(1, best);
            self.level[learnt[1].var()]
        };
        (learnt, back)
    }

    /// Assumptions responsible for forcing `p` false.
    fn analyze_final(&mut self, p: Lit) -> Vec<DimacsLit> {
        let mut core = vec![to_dimacs(p)];
        if self.decision_level() == 0 {
            return core;
        }
        self.seen[p.var()] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let x = self.trail[i];
            let v = x.var();
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                None => {
                    if self.level[v] > 0 {
                        core.push(to_dimacs(!x));
                    }
                }
                Some(r) => {
                    for &q in &self.clauses[r as usize].lits[1..] {
                        if self.level[q.var()] > 0 {
                            self.seen[q.var()] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[p.var()] = false;
        core
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var();
            self.phase[v] = !l.negative();
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                return Some(Lit((v as u32) << 1 | u32::from(!self.phase[v])));
            }
        }
        None
    }

    fn locked(&self, c: usize) -> bool {
        let l = self.clauses[c].lits[0];
        self.value(l) == TRUE && self.reason[l.var()] == Some(c as u32)
    }

    fn reduce_db(&mut self) {
        let mut cands: Vec<usize> = (0..self.clauses.len())
            .filter(|&c| {
                let cl = &self.clauses[c];
                cl.learnt && !cl.removed && cl.lits.len() > 2 && !self.locked(c)
            })
            .collect();
        cands.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .total_cmp(&self.clauses[b].activity)
        });
        for &c in &cands[..cands.len() / 2] {
            self.clauses[c].removed = true;
            self.clauses[c].lits = Vec::new();
            self.learnt_count -= 1;
        }
        for ws in &mut self.watches {
            let clauses = &self.clauses;
            ws.retain(|w| !clauses[w.clause as usize].removed);
        }
    }

    /// Decides the formula under the given assumptions. SAT models are
    /// checked against every clause ever added before being returned.
    pub fn solve_with(&mut self, assumptions: &[DimacsLit]) -> Result<SolveOutcome, SatError> {
        let start = Instant::now();
        let before = self.stats.clone();
        if let Some(max) = assumptions.iter().map(|l| l.unsigned_abs() as usize).max() {
            self.reserve_vars(max);
        }
        let verdict = self.search_loop(assumptions, start);
        let mut stats = self.stats.delta(&before);
        stats.wall_time = start.elapsed();
        self.stats.wall_time += stats.wall_time;

        let outcome = match verdict {
            Verdict::Sat => {
                let model: Vec<bool> = self.assigns.iter().map(|&a| a == TRUE).collect();
                self.cancel_until(0);
                self.verify(&model)?;
                SolveOutcome {
                    verdict,
                    model: Some(model),
                    stats,
                }
            }
            _ => {
                self.cancel_until(0);
                SolveOutcome {
                    verdict,
                    model: None,
                    stats,
                }
            }
        };
        Ok(outcome)
    }

    fn verify(&self, model: &[bool]) -> Result<(), SatError> {
        for (i, c) in self.original.iter().enumerate() {
            let sat = c.iter().any(|&l| {
                let v = l.unsigned_abs() as usize - 1;
                model[v] == (l > 0)
            });
            if !sat {
                return Err(SatError::ModelVerification {
                    clause: i,
                    output: format!("{c:?}"),
                });
            }
        }
        Ok(())
    }

    fn search_loop(&mut self, assumptions: &[DimacsLit], start: Instant) -> Verdict {
        if !self.ok {
            return Verdict::Unsat;
        }
        if self.propagate().is_some() {
            self.ok = false;
            return Verdict::Unsat;
        }
        let assumptions: Vec<Lit> = assumptions.iter().map(|&l| Lit::from_dimacs(l)).collect();
        if self.max_learnts == 0.0 {
            self.max_learnts = (self.clauses.len() as f64 / 3.0).max(5000.0);
        }
        let budget_start = self.stats.conflicts;
        let mut restart = 0u32;
        loop {
            let limit = 100.0 * luby(2.0, restart);
            restart += 1;
            match self.search(limit as u64, &assumptions, budget_start, start) {
                Some(v) => return v,
                None => {
                    self.stats.restarts += 1;
                    self.cancel_until(0);
                }
            }
        }
    }

    fn over_budget(&self, budget_start: u64, start: Instant) -> bool {
        let used = self.stats.conflicts - budget_start;
        if self.config.max_conflicts.is_some_and(|m| used >= m) {
            return true;
        }
        used.is_multiple_of(64) && self.config.time_limit.is_some_and(|t| start.elapsed() >= t)
    }

    /// Runs until a verdict or until `nof_conflicts` conflicts (restart).
    fn search(
        &mut self,
        nof_conflicts: u64,
        assumptions: &[Lit],
        budget_start: u64,
        start: Instant,
    ) -> Option<Verdict> {
        let mut conflicts_here = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_here += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(Verdict::Unsat);
                }
                let (learnt, back) = self.analyze(confl);
                self.cancel_until(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref as usize);
                    self.enqueue(first, Some(cref));
                }
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
                if self.over_budget(budget_start, start) {
                    return Some(Verdict::Unknown);
                }
            } else {
                if conflicts_here >= nof_conflicts {
                    return None;
                }
                if self.learnt_count as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                    self.max_learnts *= 1.1;
                }
                let mut next = None;
                while (self.decision_level() as usize) < assumptions.len() {
                    let p = assumptions[self.decision_level() as usize];
                    match self.value(p) {
                        TRUE => self.trail_lim.push(self.trail.len()),
                        FALSE => {
                            let _core = self.analyze_final(!p);
                            return Some(Verdict::Unsat);
                        }
                        _ => {
                            next = Some(p);
                            break;
                        }
                    }
                }
                let decision = match next {
                    Some(p) => p,
                    None => match self.pick_branch() {
                        Some(p) => p,
                        None => return Some(Verdict::Sat),
                    },
                };
                self.stats.decisions += 1;
                self.trail_lim.push(self.trail.len());
                self.enqueue(decision, None);
            }
        }
    }
}

fn to_dimacs(l: Lit) -> DimacsLit {
    let v = l.var() as DimacsLit + 1;
    if l.negative() {
        -v
    } else {
        v
    }
}

/// The Luby restart sequence scaled by `y`.
fn luby(y: f64, mut x: u32) -> f64 {
    let (mut size, mut seq) = (1u32, 0i32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}
