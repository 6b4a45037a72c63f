//! Cycle-accurate reference interpreter.
//!
//! A configuration carries a store, a liveness map, an influence map, one
//! deferred-assignment buffer per process, the set of variables written in
//! the current cycle, and the cycle counter. Within a cycle, steps are taken
//! with a fixed priority: any enabled continuous assignment fires first, then
//! one step of some sequential process, then one deferred (non-blocking)
//! assignment is applied; when nothing is enabled, the cycle ends.
//!
//! Each trace entry is a snapshot taken at the start of a cycle, after wires
//! have been reset to `Unknown`, source registers have been driven from the
//! input schedule, liveness and influence boundary updates are applied, and
//! the source-triggered continuous assignments have settled. Sinks are always
//! registers, so later in-cycle activity never retroactively changes what a
//! snapshot reports about them.

mod eval;

pub use eval::{apply_symbol, eval_expr, mask, CycleSet, Evaled, Value};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{
    AnnotationSet, Expression, Formula, FormulaAtom, ProcessId, ProcessKind, Program, Side,
    Statement,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("guard evaluated to an unknown value in process {process} at cycle {cycle}")]
    GuardUnknown { process: ProcessId, cycle: u32 },
    #[error("continuous assignments to `{wire}` did not quiesce; combinational loop suspected")]
    CombinationalLoop { wire: String },
    #[error("input schedule targets `{name}`, which is not a declared register")]
    ScheduleTarget { name: String },
    #[error("run requires at least one cycle")]
    ZeroCycles,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PairError {
    #[error("traces have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("traces are not a pair of t-traces for the same t")]
    NotTTrace,
}

/// What a source register reads when the schedule has no entry for a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DefaultPolicy {
    #[default]
    HoldPrevious,
    Unknown,
}

/// Values driven onto registers at cycle boundaries. Sources are driven every
/// cycle (falling back to the default policy); other registers are driven
/// only at cycles with explicit entries, which is how initial stores and
/// test harness overrides are expressed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSchedule {
    pub default: DefaultPolicy,
    pub entries: BTreeMap<u32, BTreeMap<String, u64>>,
}

impl InputSchedule {
    pub fn new(default: DefaultPolicy) -> Self {
        InputSchedule {
            default,
            entries: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, cycle: u32, var: impl Into<String>, value: u64) -> &mut Self {
        self.entries.entry(cycle).or_default().insert(var.into(), value);
        self
    }

    pub fn get(&self, cycle: u32, var: &str) -> Option<u64> {
        self.entries.get(&cycle).and_then(|m| m.get(var)).copied()
    }

    pub fn vars(&self) -> BTreeSet<&str> {
        self.entries
            .values()
            .flat_map(|m| m.keys().map(|s| s.as_str()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub cycle: u32,
    pub issue: bool,
    pub store: BTreeMap<String, Value>,
    pub live: BTreeMap<String, bool>,
    pub influence: BTreeMap<String, CycleSet>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The unique issue cycle, if the trace is a t-trace.
    pub fn issue_cycle(&self) -> Option<u32> {
        let mut t = None;
        for e in &self.entries {
            if e.issue {
                if t.is_some() {
                    return None;
                }
                t = Some(e.cycle);
            }
        }
        t
    }

    /// Checks that every live variable carries the issue cycle in its
    /// influence set, at every snapshot. Returns the violations.
    pub fn live_implies_influence(&self, t: u32) -> Vec<(u32, String)> {
        let mut bad = Vec::new();
        for e in &self.entries {
            for (v, lv) in &e.live {
                if *lv && !e.influence.get(v).map(|s| s.contains(&t)).unwrap_or(false) {
                    bad.push((e.cycle, v.clone()));
                }
            }
        }
        bad
    }

    /// Renders the trace as CSV, one row per cycle with value, liveness bit,
    /// and influence set per variable.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let Some(first) = self.entries.first() else {
            return out;
        };
        let vars: Vec<&String> = first.store.keys().collect();
        out.push_str("cycle,issue");
        for v in &vars {
            let _ = write!(out, ",{v},live[{v}],inf[{v}]");
        }
        out.push('\n');
        for e in &self.entries {
            let _ = write!(out, "{},{}", e.cycle, e.issue as u8);
            for v in &vars {
                let val = e.store.get(*v).cloned().unwrap_or(Value::Unknown);
                let live = e.live.get(*v).copied().unwrap_or(false) as u8;
                let inf = e
                    .influence
                    .get(*v)
                    .map(|s| {
                        s.iter()
                            .map(|c| c.to_string())
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .unwrap_or_default();
                let _ = write!(out, ",{val},{live},\"{{{inf}}}\"");
            }
            out.push('\n');
        }
        out
    }
}

/// True iff the two traces produce identical influence sets for every sink at
/// every cycle.
pub fn check_ct_pair(
    left: &Trace,
    right: &Trace,
    sinks: &BTreeSet<String>,
) -> Result<bool, PairError> {
    if left.len() != right.len() {
        return Err(PairError::LengthMismatch {
            left: left.len(),
            right: right.len(),
        });
    }
    Ok(ct_divergence(left, right, sinks).is_none())
}

/// First (cycle, sink) at which the sink influence sets differ.
pub fn ct_divergence(
    left: &Trace,
    right: &Trace,
    sinks: &BTreeSet<String>,
) -> Option<(u32, String)> {
    for (l, r) in left.entries.iter().zip(&right.entries) {
        for s in sinks {
            if l.influence.get(s) != r.influence.get(s) {
                return Some((l.cycle, s.clone()));
            }
        }
    }
    None
}

/// True iff the two t-traces agree on every sink liveness bit at every cycle.
pub fn check_liveq_pair(
    left: &Trace,
    right: &Trace,
    sinks: &BTreeSet<String>,
) -> Result<bool, PairError> {
    if left.len() != right.len() {
        return Err(PairError::LengthMismatch {
            left: left.len(),
            right: right.len(),
        });
    }
    match (left.issue_cycle(), right.issue_cycle()) {
        (Some(a), Some(b)) if a == b => {}
        _ => return Err(PairError::NotTTrace),
    }
    Ok(liveq_divergence(left, right, sinks).is_none())
}

/// First (cycle, sink) at which the sink liveness bits differ.
pub fn liveq_divergence(
    left: &Trace,
    right: &Trace,
    sinks: &BTreeSet<String>,
) -> Option<(u32, String)> {
    for (l, r) in left.entries.iter().zip(&right.entries) {
        for s in sinks {
            if l.live.get(s) != r.live.get(s) {
                return Some((l.cycle, s.clone()));
            }
        }
    }
    None
}

/// Evaluates an assumption formula over a pair of stores.
/// Atoms touching `Unknown` values are unsatisfied.
pub fn formula_holds(
    f: &Formula,
    left: &BTreeMap<String, Value>,
    right: &BTreeMap<String, Value>,
) -> bool {
    let get = |store: &BTreeMap<String, Value>, x: &str| -> Option<u64> {
        match store.get(x) {
            Some(Value::Bits { val, .. }) => Some(*val),
            _ => None,
        }
    };
    f.atoms.iter().all(|atom| match atom {
        FormulaAtom::EqLR(x) => match (get(left, x), get(right, x)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        },
        FormulaAtom::EqConst(side, x, c) => {
            let on = |store| get(store, x).map(|v| v == *c).unwrap_or(false);
            match side {
                Side::Left => on(left),
                Side::Right => on(right),
                Side::Both => on(left) && on(right),
            }
        }
        FormulaAtom::EqVars(side, x, y) => {
            let on = |store: &BTreeMap<String, Value>| match (get(store, x), get(store, y)) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            };
            match side {
                Side::Left => on(left),
                Side::Right => on(right),
                Side::Both => on(left) && on(right),
            }
        }
    })
}

/// True iff the trace pair satisfies all initial and always assumptions.
pub fn pair_satisfies_assumptions(annots: &AnnotationSet, left: &Trace, right: &Trace) -> bool {
    if let (Some(l0), Some(r0)) = (left.entries.first(), right.entries.first()) {
        for f in &annots.initial_eq {
            if !formula_holds(f, &l0.store, &r0.store) {
                return false;
            }
        }
    }
    for (l, r) in left.entries.iter().zip(&right.entries) {
        for f in &annots.always_eq {
            if !formula_holds(f, &l.store, &r.store) {
                return false;
            }
        }
    }
    true
}

/// How same-priority choices are resolved inside one cycle. The canonical
/// scheduler picks ascending ids and FIFO order; the randomized one permutes
/// choices and exists to witness races.
pub enum Scheduler<'r> {
    Canonical,
    Random(&'r mut ChaCha8Rng),
}

impl Scheduler<'_> {
    fn pick(&mut self, n: usize) -> usize {
        match self {
            Scheduler::Canonical => 0,
            Scheduler::Random(rng) => rng.gen_range(0..n),
        }
    }
}

#[derive(Debug, Clone)]
struct Buffered {
    var: String,
    value: Value,
    live: bool,
    influence: CycleSet,
}

#[derive(Debug, Clone)]
enum WorkItem {
    Stmt(Statement),
    PopGuard,
}

#[derive(Debug, Clone)]
struct Frame {
    pid: ProcessId,
    /// Remaining work, executed from the back.
    work: Vec<WorkItem>,
    /// Liveness bits and influence sets of the guards entered so far.
    guards: Vec<(bool, CycleSet)>,
}

#[derive(Debug, Clone)]
struct ContEq {
    lhs: String,
    rhs: Expression,
    deps: BTreeSet<String>,
    /// Write-sequence watermark up to which dependencies have been consumed.
    seen: u64,
    fires: u32,
}

/// One interpreter state. Owned by a single run.
pub struct Configuration<'p> {
    program: &'p Program,
    annots: &'p AnnotationSet,
    store: BTreeMap<String, Value>,
    live: BTreeMap<String, bool>,
    infl: BTreeMap<String, CycleSet>,
    buffers: BTreeMap<ProcessId, VecDeque<Buffered>>,
    events: BTreeSet<String>,
    write_seq: BTreeMap<String, u64>,
    seq: u64,
    cycle: u32,
    frames: Vec<Frame>,
    conts: Vec<ContEq>,
    wire_count: u32,
}

impl<'p> Configuration<'p> {
    pub fn new(program: &'p Program, annots: &'p AnnotationSet) -> Self {
        let mut store = BTreeMap::new();
        let mut live = BTreeMap::new();
        let mut infl = BTreeMap::new();
        for v in program.vars.values() {
            store.insert(v.name.clone(), Value::Unknown);
            live.insert(v.name.clone(), false);
            infl.insert(v.name.clone(), CycleSet::new());
        }
        let conts = program
            .continuous_assigns()
            .into_iter()
            .map(|(_pid, lhs, rhs)| ContEq {
                deps: rhs.free_vars(),
                lhs,
                rhs,
                seen: 0,
                fires: 0,
            })
            .collect();
        let wire_count = program.wires().count() as u32;
        Configuration {
            program,
            annots,
            store,
            live,
            infl,
            buffers: BTreeMap::new(),
            events: BTreeSet::new(),
            write_seq: BTreeMap::new(),
            seq: 0,
            cycle: 0,
            frames: Vec::new(),
            conts,
            wire_count,
        }
    }

    fn mark_written(&mut self, var: &str) {
        self.seq += 1;
        self.write_seq.insert(var.to_string(), self.seq);
        self.events.insert(var.to_string());
    }

    fn write_var(&mut self, var: &str, value: Value, live: bool, influence: CycleSet) {
        let width = self.program.vars[var].width;
        self.store.insert(var.to_string(), value.truncate(width));
        self.live.insert(var.to_string(), live);
        self.infl.insert(var.to_string(), influence);
        self.mark_written(var);
    }

    /// Starts cycle `cycle`: resets wires to `Unknown`, applies the boundary
    /// liveness and influence updates, drives scheduled registers, and
    /// reschedules every process.
    fn begin_cycle(&mut self, cycle: u32, issue: bool, inputs: &InputSchedule) {
        self.cycle = cycle;
        self.events.clear();
        self.buffers.clear();
        // Only writes after this watermark count as triggers this cycle.
        let epoch = self.seq;
        let wires: Vec<String> = self.program.wires().map(|w| w.name.clone()).collect();
        for w in &wires {
            self.store.insert(w.clone(), Value::Unknown);
            self.live.insert(w.clone(), false);
            self.infl.insert(w.clone(), CycleSet::new());
        }
        if issue {
            for (name, lv) in self.live.iter_mut() {
                *lv = self.annots.sources.contains(name);
            }
        } else {
            for s in &self.annots.sources {
                self.live.insert(s.clone(), false);
            }
        }
        for s in &self.annots.sources {
            self.infl.insert(s.clone(), CycleSet::from([cycle]));
        }

        // Environment drive: explicit entries first, then sources without an
        // entry fall back to the default policy. Every driven register counts
        // as written so source-fed continuous assignments re-fire.
        if let Some(row) = inputs.entries.get(&cycle) {
            for (name, raw) in row.clone() {
                let width = self.program.vars[&name].width;
                self.store.insert(name.clone(), Value::bits(width, raw));
                self.mark_written(&name);
            }
        }
        for s in self.annots.sources.clone() {
            if inputs.get(cycle, &s).is_some() {
                continue;
            }
            match inputs.default {
                DefaultPolicy::HoldPrevious => {}
                DefaultPolicy::Unknown => {
                    self.store.insert(s.clone(), Value::Unknown);
                }
            }
            self.mark_written(&s);
        }

        self.frames = self
            .program
            .processes
            .iter()
            .filter(|p| p.kind == ProcessKind::Sequential)
            .map(|p| {
                let mut f = Frame {
                    pid: p.id,
                    work: vec![WorkItem::Stmt(p.body.clone())],
                    guards: Vec::new(),
                };
                f.settle();
                f
            })
            .collect();
        for c in &mut self.conts {
            c.seen = epoch;
            c.fires = 0;
        }
    }

    fn enabled_conts(&self) -> Vec<usize> {
        self.conts
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                c.deps
                    .iter()
                    .any(|d| self.write_seq.get(d).copied().unwrap_or(0) > c.seen)
            })
            .map(|(i, _)| i)
            .collect()
    }

    fn fire_cont(&mut self, idx: usize) -> Result<(), SimError> {
        let (lhs, rhs) = {
            let c = &mut self.conts[idx];
            c.seen = self.seq;
            c.fires += 1;
            if c.fires > self.wire_count + 1 {
                return Err(SimError::CombinationalLoop {
                    wire: c.lhs.clone(),
                });
            }
            (c.lhs.clone(), c.rhs.clone())
        };
        let r = eval_expr(&rhs, &self.store, &self.live, &self.infl);
        self.write_var(&lhs, r.value, r.live, r.influence);
        Ok(())
    }

    /// Fires enabled continuous assignments until quiescent.
    fn settle_conts(&mut self, sched: &mut Scheduler) -> Result<(), SimError> {
        loop {
            let enabled = self.enabled_conts();
            if enabled.is_empty() {
                return Ok(());
            }
            let idx = enabled[sched.pick(enabled.len())];
            self.fire_cont(idx)?;
        }
    }

    /// One sequential micro-step for the frame at `frame_idx`.
    fn step_frame(&mut self, frame_idx: usize) -> Result<(), SimError> {
        let pid = self.frames[frame_idx].pid;
        let item = self.frames[frame_idx].work.pop().expect("frame has work");
        match item {
            WorkItem::PopGuard => unreachable!("trivia drained by settle()"),
            WorkItem::Stmt(stmt) => match stmt {
                Statement::BlockingAssign { lhs, rhs } => {
                    let mut r = eval_expr(&rhs, &self.store, &self.live, &self.infl);
                    self.join_guards(frame_idx, &mut r);
                    self.write_var(&lhs, r.value, r.live, r.influence);
                }
                Statement::NonBlockingAssign { lhs, rhs } => {
                    let mut r = eval_expr(&rhs, &self.store, &self.live, &self.infl);
                    self.join_guards(frame_idx, &mut r);
                    self.buffers.entry(pid).or_default().push_back(Buffered {
                        var: lhs,
                        value: r.value,
                        live: r.live,
                        influence: r.influence,
                    });
                }
                Statement::IfThenElse {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    let g = eval_expr(&cond, &self.store, &self.live, &self.infl);
                    let taken = g.value.as_bool().ok_or(SimError::GuardUnknown {
                        process: pid,
                        cycle: self.cycle,
                    })?;
                    let frame = &mut self.frames[frame_idx];
                    frame.work.push(WorkItem::PopGuard);
                    frame.work.push(WorkItem::Stmt(if taken {
                        *then_branch
                    } else {
                        *else_branch
                    }));
                    frame.guards.push((g.live, g.influence));
                }
                Statement::Skip | Statement::Sequence(_) | Statement::ContinuousAssign { .. } => {
                    unreachable!("drained or rejected by validation")
                }
            },
        }
        self.frames[frame_idx].settle();
        Ok(())
    }

    fn join_guards(&self, frame_idx: usize, r: &mut Evaled) {
        for (glive, ginfl) in &self.frames[frame_idx].guards {
            r.live |= glive;
            r.influence.extend(ginfl.iter().copied());
        }
    }

    fn apply_buffered(&mut self, pid: ProcessId) {
        let b = self
            .buffers
            .get_mut(&pid)
            .and_then(|q| q.pop_front())
            .expect("nonempty buffer");
        if self.buffers.get(&pid).map(|q| q.is_empty()).unwrap_or(false) {
            self.buffers.remove(&pid);
        }
        self.write_var(&b.var, b.value, b.live, b.influence);
    }

    /// Runs the in-cycle step loop to quiescence.
    fn run_cycle(&mut self, sched: &mut Scheduler) -> Result<(), SimError> {
        loop {
            self.settle_conts(sched)?;
            let ready: Vec<usize> = self
                .frames
                .iter()
                .enumerate()
                .filter(|(_, f)| !f.work.is_empty())
                .map(|(i, _)| i)
                .collect();
            if !ready.is_empty() {
                let idx = ready[sched.pick(ready.len())];
                self.step_frame(idx)?;
                continue;
            }
            let pids: Vec<ProcessId> = self.buffers.keys().copied().collect();
            if !pids.is_empty() {
                let pid = pids[sched.pick(pids.len())];
                self.apply_buffered(pid);
                continue;
            }
            return Ok(());
        }
    }

    fn snapshot(&self, issue: bool) -> TraceEntry {
        TraceEntry {
            cycle: self.cycle,
            issue,
            store: self.store.clone(),
            live: self.live.clone(),
            influence: self.infl.clone(),
        }
    }
}

impl Frame {
    /// Drains bookkeeping items so the next work item is a real action.
    fn settle(&mut self) {
        loop {
            match self.work.last() {
                Some(WorkItem::PopGuard) => {
                    self.work.pop();
                    self.guards.pop();
                }
                Some(WorkItem::Stmt(Statement::Skip)) => {
                    self.work.pop();
                }
                Some(WorkItem::Stmt(Statement::Sequence(_))) => {
                    let Some(WorkItem::Stmt(Statement::Sequence(items))) = self.work.pop() else {
                        unreachable!()
                    };
                    for s in items.into_iter().rev() {
                        self.work.push(WorkItem::Stmt(s));
                    }
                }
                _ => return,
            }
        }
    }
}

fn validate_schedule(program: &Program, inputs: &InputSchedule) -> Result<(), SimError> {
    for name in inputs.vars() {
        if !program.is_register(name) {
            return Err(SimError::ScheduleTarget { name: name.into() });
        }
    }
    Ok(())
}

/// Runs `program` for `n_cycles` cycles with the canonical scheduler,
/// issuing liveness at `t_issue` (if given), and returns the trace: one
/// snapshot per cycle.
pub fn run(
    program: &Program,
    annots: &AnnotationSet,
    inputs: &InputSchedule,
    t_issue: Option<u32>,
    n_cycles: u32,
) -> Result<Trace, SimError> {
    run_scheduled(
        program,
        annots,
        inputs,
        t_issue,
        n_cycles,
        &mut Scheduler::Canonical,
    )
}

/// As [`run`], with an explicit same-priority scheduler.
pub fn run_scheduled(
    program: &Program,
    annots: &AnnotationSet,
    inputs: &InputSchedule,
    t_issue: Option<u32>,
    n_cycles: u32,
    sched: &mut Scheduler,
) -> Result<Trace, SimError> {
    if n_cycles == 0 {
        return Err(SimError::ZeroCycles);
    }
    validate_schedule(program, inputs)?;
    let mut cfg = Configuration::new(program, annots);
    let mut trace = Trace::default();
    for cycle in 0..n_cycles {
        let issue = t_issue == Some(cycle);
        cfg.begin_cycle(cycle, issue, inputs);
        cfg.settle_conts(sched)?;
        trace.entries.push(cfg.snapshot(issue));
        cfg.run_cycle(sched)?;
    }
    if let Some(t) = t_issue {
        debug_assert!(
            trace.live_implies_influence(t).is_empty(),
            "liveness without influence membership"
        );
    }
    Ok(trace)
}

#[cfg(test)]
pub mod tests;
