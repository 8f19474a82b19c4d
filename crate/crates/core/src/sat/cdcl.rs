//! Conflict-driven clause learning with two watched literals, first-UIP
//! learning, VSIDS branching, phase saving and Luby restarts.
//!
//! Assumptions are decided first, one per decision level. When an assumption
//! is found false, the implication graph is walked back to the assumptions
//! responsible, which yields the failed-assumption core.

use crate::logic::{Lit, Var};

use super::clock::Stopwatch;

const NO_REASON: u32 = u32::MAX;
const RESTART_BASE: u64 = 100;
const VAR_DECAY: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Value {
    True,
    False,
    Undef,
}

#[derive(Clone, Copy, Debug)]
struct Watch {
    cref: u32,
    blocker: Lit,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
}

#[derive(Clone, Debug, Default)]
pub struct Budget {
    pub max_conflicts: Option<u64>,
    pub max_millis: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Full assignment indexed by variable.
    Sat(Vec<bool>),
    /// The subset of assumptions that cannot hold together.
    Unsat(Vec<Lit>),
    /// Budget ran out before a verdict.
    Unknown,
}

/// Binary max-heap over variables ordered by activity, ties to the lower index.
#[derive(Clone, Debug, Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn better(act: &[f64], a: u32, b: u32) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize].is_some()
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v as usize] = Some(self.heap.len());
        self.heap.push(v);
        self.up(self.heap.len() - 1, act);
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = Some(0);
            self.down(0, act);
        }
        Some(top)
    }

    fn bumped(&mut self, v: u32, act: &[f64]) {
        if let Some(i) = self.pos[v as usize] {
            self.up(i, act);
        }
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !Self::better(act, v, p) {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let child = if r < n && Self::better(act, self.heap[r], self.heap[l]) { r } else { l };
            let c = self.heap[child];
            if !Self::better(act, c, v) {
                break;
            }
            self.heap[i] = c;
            self.pos[c as usize] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i);
    }
}

fn luby(mut i: u64) -> u64 {
    // i is 0-based
    let (mut size, mut seq) = (1u64, 0u32);
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

#[derive(Clone, Debug)]
pub struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    order: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    pub counters: Counters,
}

impl Solver {
    pub fn new(num_vars: usize) -> Self {
        let mut s = Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assigns: vec![Value::Undef; num_vars],
            level: vec![0; num_vars],
            reason: vec![NO_REASON; num_vars],
            trail: Vec::with_capacity(num_vars),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; num_vars],
            var_inc: 1.0,
            order: VarHeap {
                heap: Vec::with_capacity(num_vars),
                pos: vec![None; num_vars],
            },
            phase: vec![false; num_vars],
            seen: vec![false; num_vars],
            ok: true,
            counters: Counters::default(),
        };
        for v in 0..num_vars as u32 {
            s.order.insert(v, &s.activity);
        }
        s
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    fn value(&self, l: Lit) -> Value {
        match self.assigns[l.var().index()] {
            Value::Undef => Value::Undef,
            Value::True if l.is_neg() => Value::False,
            Value::False if l.is_neg() => Value::True,
            v => v,
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause at level 0. Returns false once the clause set is known UNSAT.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok {
            return false;
        }
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        let mut out = Vec::with_capacity(c.len());
        for (i, &l) in c.iter().enumerate() {
            if i + 1 < c.len() && c[i + 1] == !l {
                return true;
            }
            match self.value(l) {
                Value::True => return true,
                Value::False => {}
                Value::Undef => out.push(l),
            }
        }
        match out.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(out[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(out);
                true
            }
        }
    }

    fn attach(&mut self, c: Vec<Lit>) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[c[0].code()].push(Watch { cref, blocker: c[1] });
        self.watches[c[1].code()].push(Watch { cref, blocker: c[0] });
        self.clauses.push(c);
        cref
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        let v = l.var().index();
        self.assigns[v] = if l.is_neg() { Value::False } else { Value::True };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns a conflicting clause if any.
    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.counters.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let (mut i, mut j) = (0, 0);
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == Value::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                {
                    let c = &mut self.clauses[cref];
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                }
                let first = self.clauses[cref][0];
                let nw = Watch { cref: w.cref, blocker: first };
                if first != w.blocker && self.value(first) == Value::True {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref].len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[cref][k];
                    if self.value(l) != Value::False {
                        self.clauses[cref].swap(1, k);
                        self.watches[l.code()].push(nw);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = nw;
                j += 1;
                if self.value(first) == Value::False {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, w.cref);
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                break;
            }
        }
        conflict
    }

    fn bump(&mut self, v: Var) {
        let i = v.index();
        self.activity[i] += self.var_inc;
        if self.activity[i] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(v.0, &self.activity);
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            let start = usize::from(p.is_some());
            for k in start..self.clauses[confl as usize].len() {
                let q = self.clauses[confl as usize][k];
                let v = q.var();
                if !self.seen[v.index()] && self.level[v.index()] > 0 {
                    self.bump(v);
                    self.seen[v.index()] = true;
                    if self.level[v.index()] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var().index()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            confl = self.reason[lit.var().index()];
            self.seen[lit.var().index()] = false;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        learnt[0] = !p.unwrap();

        // Drop literals implied by other learnt literals (local minimization).
        let mut keep = vec![learnt[0]];
        for &l in &learnt[1..] {
            let r = self.reason[l.var().index()];
            let redundant = r != NO_REASON
                && self.clauses[r as usize][1..].iter().all(|q| {
                    self.seen[q.var().index()] || self.level[q.var().index()] == 0
                });
            if !redundant {
                keep.push(l);
            }
        }
        for &l in &learnt[1..] {
            self.seen[l.var().index()] = false;
        }
        let mut learnt = keep;

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().index()]
        };
        (learnt, bt)
    }

    /// Assumptions responsible for `p` (the negation of a failed assumption) being true.
    fn analyze_final(&mut self, p: Lit) -> Vec<Lit> {
        let mut failed = vec![!p];
        if self.decision_level() == 0 {
            return failed;
        }
        self.seen[p.var().index()] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let l = self.trail[i];
            let x = l.var().index();
            if !self.seen[x] {
                continue;
            }
            let r = self.reason[x];
            if r == NO_REASON {
                if self.level[x] > 0 {
                    failed.push(l);
                }
            } else {
                for &q in &self.clauses[r as usize][1..] {
                    if self.level[q.var().index()] > 0 {
                        self.seen[q.var().index()] = true;
                    }
                }
            }
            self.seen[x] = false;
        }
        self.seen[p.var().index()] = false;
        failed
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            self.assigns[v] = Value::Undef;
            self.reason[v] = NO_REASON;
            self.phase[v] = !l.is_neg();
            self.order.insert(v as u32, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v as usize] == Value::Undef {
                return Some(Lit::new(Var(v), !self.phase[v as usize]));
            }
        }
        None
    }

    pub fn solve(&mut self, assumptions: &[Lit], budget: &Budget) -> Outcome {
        if !self.ok {
            return Outcome::Unsat(Vec::new());
        }
        let clock = Stopwatch::start();
        let mut restart = 0u64;
        let mut conflicts_since_restart = 0u64;
        let mut limit = RESTART_BASE * luby(restart);
        loop {
            if let Some(confl) = self.propagate() {
                self.counters.conflicts += 1;
                conflicts_since_restart += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Outcome::Unsat(Vec::new());
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(learnt);
                    self.enqueue(first, cref);
                }
                self.var_inc /= VAR_DECAY;
                if let Some(max) = budget.max_conflicts {
                    if self.counters.conflicts >= max {
                        self.cancel_until(0);
                        return Outcome::Unknown;
                    }
                }
                if let Some(ms) = budget.max_millis {
                    if self.counters.conflicts.is_multiple_of(64) && clock.elapsed_millis() >= ms {
                        self.cancel_until(0);
                        return Outcome::Unknown;
                    }
                }
                continue;
            }
            if conflicts_since_restart >= limit {
                restart += 1;
                conflicts_since_restart = 0;
                limit = RESTART_BASE * luby(restart);
                self.cancel_until(0);
                continue;
            }
            let mut next = None;
            while (self.decision_level() as usize) < assumptions.len() {
                let a = assumptions[self.decision_level() as usize];
                match self.value(a) {
                    Value::True => self.trail_lim.push(self.trail.len()),
                    Value::False => {
                        let core = self.analyze_final(!a);
                        self.cancel_until(0);
                        return Outcome::Unsat(core);
                    }
                    Value::Undef => {
                        next = Some(a);
                        break;
                    }
                }
            }
            let next = match next {
                Some(a) => a,
                None => match self.pick_branch() {
                    Some(l) => {
                        self.counters.decisions += 1;
                        l
                    }
                    None => {
                        let model = self
                            .assigns
                            .iter()
                            .map(|v| *v == Value::True)
                            .collect();
                        self.cancel_until(0);
                        return Outcome::Sat(model);
                    }
                },
            };
            self.trail_lim.push(self.trail.len());
            self.enqueue(next, NO_REASON);
        }
    }
}
