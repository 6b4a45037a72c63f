//! A small CDCL SAT solver: two-watched literals, first-UIP clause learning,
//! activity-driven decisions, and geometric restarts. Instances here are the
//! bit-blasted per-cycle formulas of desk-scale designs, a few thousand
//! clauses at most.

/// A literal; variable `v` positive is `2v`, negative `2v+1`.
pub type Lit = u32;

pub fn lit(var: usize, positive: bool) -> Lit {
    (var as u32) << 1 | (!positive as u32)
}

fn var_of(l: Lit) -> usize {
    (l >> 1) as usize
}

fn negate(l: Lit) -> Lit {
    l ^ 1
}

fn is_pos(l: Lit) -> bool {
    l & 1 == 0
}

#[derive(Debug, PartialEq)]
pub enum SatResult {
    Sat(Vec<bool>),
    Unsat,
}

#[derive(Clone, Copy, PartialEq)]
enum Val {
    Undef,
    True,
    False,
}

struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assign: Vec<Val>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    queue_head: usize,
    activity: Vec<f64>,
    act_inc: f64,
    seen: Vec<bool>,
}

impl Solver {
    fn new(num_vars: usize) -> Self {
        Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); num_vars * 2],
            assign: vec![Val::Undef; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            queue_head: 0,
            activity: vec![0.0; num_vars],
            act_inc: 1.0,
            seen: vec![false; num_vars],
        }
    }

    fn value(&self, l: Lit) -> Val {
        match self.assign[var_of(l)] {
            Val::Undef => Val::Undef,
            Val::True => {
                if is_pos(l) {
                    Val::True
                } else {
                    Val::False
                }
            }
            Val::False => {
                if is_pos(l) {
                    Val::False
                } else {
                    Val::True
                }
            }
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) -> bool {
        match self.value(l) {
            Val::False => false,
            Val::True => true,
            Val::Undef => {
                let v = var_of(l);
                self.assign[v] = if is_pos(l) { Val::True } else { Val::False };
                self.level[v] = self.decision_level();
                self.reason[v] = reason;
                self.trail.push(l);
                true
            }
        }
    }

    /// Unit propagation; returns a conflicting clause index if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.queue_head < self.trail.len() {
            let l = self.trail[self.queue_head];
            self.queue_head += 1;
            let falsified = negate(l);
            let watch_list = std::mem::take(&mut self.watches[falsified as usize]);
            let mut kept = Vec::with_capacity(watch_list.len());
            let mut conflict = None;
            for (wi, &ci) in watch_list.iter().enumerate() {
                if conflict.is_some() {
                    kept.extend_from_slice(&watch_list[wi..]);
                    break;
                }
                let mut clause = std::mem::take(&mut self.clauses[ci]);
                // Keep the falsified literal in slot 1.
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                if self.value(first) == Val::True {
                    self.clauses[ci] = clause;
                    kept.push(ci);
                    continue;
                }
                // Look for a new literal to watch.
                let mut moved = false;
                for k in 2..clause.len() {
                    if self.value(clause[k]) != Val::False {
                        clause.swap(1, k);
                        let new_watch = clause[1];
                        self.watches[new_watch as usize].push(ci);
                        moved = true;
                        break;
                    }
                }
                self.clauses[ci] = clause;
                if moved {
                    continue;
                }
                kept.push(ci);
                if !self.enqueue(first, Some(ci)) {
                    conflict = Some(ci);
                }
            }
            self.watches[falsified as usize] = kept;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.act_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.act_inc *= 1e-100;
        }
    }

    /// First-UIP conflict analysis; returns (learnt clause, backjump level).
    fn analyze(&mut self, conflict: usize) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![0];
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut clause_idx = conflict;
        let mut trail_pos = self.trail.len();

        loop {
            let start = if p.is_none() { 0 } else { 1 };
            let lits: Vec<Lit> = self.clauses[clause_idx][start..].to_vec();
            for q in lits {
                let v = var_of(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] == self.decision_level() {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            // Select the next literal on the trail to resolve.
            loop {
                trail_pos -= 1;
                let l = self.trail[trail_pos];
                if self.seen[var_of(l)] {
                    p = Some(l);
                    break;
                }
            }
            let v = var_of(p.unwrap());
            self.seen[v] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = negate(p.unwrap());
                break;
            }
            clause_idx = self.reason[v].expect("resolved literal has a reason");
        }
        for l in &learnt[1..] {
            self.seen[var_of(*l)] = false;
        }
        let backjump = learnt[1..]
            .iter()
            .map(|l| self.level[var_of(*l)])
            .max()
            .unwrap_or(0);
        (learnt, backjump)
    }

    fn cancel_until(&mut self, level: u32) {
        while self.decision_level() > level {
            let lim = self.trail_lim.pop().unwrap();
            while self.trail.len() > lim {
                let l = self.trail.pop().unwrap();
                self.assign[var_of(l)] = Val::Undef;
                self.reason[var_of(l)] = None;
            }
        }
        self.queue_head = self.trail.len();
    }

    fn add_clause_watched(&mut self, c: Vec<Lit>) {
        let ci = self.clauses.len();
        self.watches[c[0] as usize].push(ci);
        self.watches[c[1] as usize].push(ci);
        self.clauses.push(c);
    }

    fn pick_branch(&self) -> Option<Lit> {
        let mut best: Option<(usize, f64)> = None;
        for v in 0..self.assign.len() {
            if self.assign[v] == Val::Undef {
                let a = self.activity[v];
                if best.map(|(_, ba)| a > ba).unwrap_or(true) {
                    best = Some((v, a));
                }
            }
        }
        best.map(|(v, _)| lit(v, false))
    }

    fn solve(&mut self) -> SatResult {
        let mut conflicts_until_restart = 128u64;
        let mut conflicts = 0u64;
        loop {
            if let Some(conflict) = self.propagate() {
                conflicts += 1;
                if self.decision_level() == 0 {
                    return SatResult::Unsat;
                }
                let (learnt, backjump) = self.analyze(conflict);
                self.cancel_until(backjump);
                self.act_inc *= 1.05;
                if learnt.len() == 1 {
                    let ok = self.enqueue(learnt[0], None);
                    debug_assert!(ok);
                } else {
                    let asserting = learnt[0];
                    self.add_clause_watched(learnt);
                    let ci = self.clauses.len() - 1;
                    let ok = self.enqueue(asserting, Some(ci));
                    debug_assert!(ok);
                }
                if conflicts >= conflicts_until_restart {
                    conflicts = 0;
                    conflicts_until_restart = (conflicts_until_restart * 3) / 2;
                    self.cancel_until(0);
                }
                continue;
            }
            match self.pick_branch() {
                None => {
                    let model = self
                        .assign
                        .iter()
                        .map(|v| *v == Val::True)
                        .collect();
                    return SatResult::Sat(model);
                }
                Some(l) => {
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(l, None);
                }
            }
        }
    }
}

/// Decides satisfiability of the CNF over `num_vars` variables.
pub fn solve(num_vars: usize, clauses: &[Vec<Lit>]) -> SatResult {
    let mut solver = Solver::new(num_vars);
    // Preprocess: unit clauses enqueue directly, empty clause is unsat.
    for c in clauses {
        debug_assert!(c.iter().all(|l| var_of(*l) < num_vars));
        match c.len() {
            0 => return SatResult::Unsat,
            1 => {
                if !solver.enqueue(c[0], None) {
                    return SatResult::Unsat;
                }
            }
            _ => solver.add_clause_watched(c.clone()),
        }
    }
    solver.solve()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(x: i32) -> Lit {
        lit((x.unsigned_abs() - 1) as usize, x > 0)
    }

    #[test]
    fn trivial_cases() {
        assert!(matches!(solve(1, &[vec![l(1)]]), SatResult::Sat(_)));
        assert_eq!(solve(1, &[vec![l(1)], vec![l(-1)]]), SatResult::Unsat);
        assert!(matches!(solve(0, &[]), SatResult::Sat(_)));
    }

    #[test]
    fn small_unsat_core() {
        // (a|b) & (a|-b) & (-a|b) & (-a|-b)
        let cnf = vec![
            vec![l(1), l(2)],
            vec![l(1), l(-2)],
            vec![l(-1), l(2)],
            vec![l(-1), l(-2)],
        ];
        assert_eq!(solve(2, &cnf), SatResult::Unsat);
    }

    #[test]
    fn models_satisfy_all_clauses() {
        // Pigeonhole 3 into 3 is satisfiable; verify the model.
        let mut clauses = Vec::new();
        let var = |p: usize, h: usize| (p * 3 + h) as i32 + 1;
        for p in 0..3 {
            clauses.push((0..3).map(|h| l(var(p, h))).collect::<Vec<_>>());
        }
        for h in 0..3 {
            for p1 in 0..3 {
                for p2 in (p1 + 1)..3 {
                    clauses.push(vec![l(-var(p1, h)), l(-var(p2, h))]);
                }
            }
        }
        match solve(9, &clauses) {
            SatResult::Sat(model) => {
                for c in &clauses {
                    assert!(c.iter().any(|&lt| {
                        let v = (lt >> 1) as usize;
                        model[v] == (lt & 1 == 0)
                    }));
                }
            }
            SatResult::Unsat => panic!("php(3,3) is satisfiable"),
        }
    }

    #[test]
    fn pigeonhole_4_into_3_is_unsat() {
        let mut clauses = Vec::new();
        let var = |p: usize, h: usize| (p * 3 + h) as i32 + 1;
        for p in 0..4 {
            clauses.push((0..3).map(|h| l(var(p, h))).collect::<Vec<_>>());
        }
        for h in 0..3 {
            for p1 in 0..4 {
                for p2 in (p1 + 1)..4 {
                    clauses.push(vec![l(-var(p1, h)), l(-var(p2, h))]);
                }
            }
        }
        assert_eq!(solve(12, &clauses), SatResult::Unsat);
    }

    #[test]
    fn xor_chain_forces_unique_model() {
        // x1 ^ x2 = 1, x2 ^ x3 = 1, x1 = 1  =>  x2 = 0, x3 = 1.
        let xor1 = |a: i32, b: i32, clauses: &mut Vec<Vec<Lit>>| {
            clauses.push(vec![l(a), l(b)]);
            clauses.push(vec![l(-a), l(-b)]);
        };
        let mut clauses = vec![vec![l(1)]];
        xor1(1, 2, &mut clauses);
        xor1(2, 3, &mut clauses);
        match solve(3, &clauses) {
            SatResult::Sat(m) => assert_eq!(m, vec![true, false, true]),
            _ => panic!("satisfiable"),
        }
    }
}
