//! Race-freedom gate: conservative static checks plus a randomized-schedule
//! differ.
//!
//! The product construction is only sound when intra-cycle scheduling cannot
//! change the outcome. The static check over-approximates: any variable with
//! two writing processes, and any register that one process updates with a
//! blocking assignment while another reads it, is flagged. The dynamic differ
//! replays random input schedules under permuted same-priority schedules and
//! reports any end-of-cycle divergence with a replayable seed.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ir::{AnnotationSet, AssignKind, ProcessId, Program};
use crate::oracle::enumerated_registers;
use crate::sim::{run_scheduled, DefaultPolicy, InputSchedule, Scheduler, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RaceKind {
    MultiWriter,
    ReadWriteIntraCycle,
    DynamicDivergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaceFinding {
    pub kind: RaceKind,
    pub variables: Vec<String>,
    pub processes: Vec<ProcessId>,
    /// Present on dynamic findings; replaying this seed reproduces the
    /// divergence.
    pub replay_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RaceVerdict {
    RaceFree,
    Racy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaceReport {
    pub verdict: RaceVerdict,
    pub findings: Vec<RaceFinding>,
}

impl RaceReport {
    fn from_findings(findings: Vec<RaceFinding>) -> Self {
        RaceReport {
            verdict: if findings.is_empty() {
                RaceVerdict::RaceFree
            } else {
                RaceVerdict::Racy
            },
            findings,
        }
    }

    pub fn is_race_free(&self) -> bool {
        self.verdict == RaceVerdict::RaceFree
    }
}

/// Static over-approximation: multi-writer variables and cross-process reads
/// of blocking-assigned registers.
pub fn static_races(program: &Program) -> RaceReport {
    let mut writers: BTreeMap<String, BTreeSet<ProcessId>> = BTreeMap::new();
    let mut blocking_writers: BTreeMap<String, BTreeSet<ProcessId>> = BTreeMap::new();
    for p in &program.processes {
        for (var, kind) in p.body.assigned_vars() {
            writers.entry(var.clone()).or_default().insert(p.id);
            if kind == AssignKind::Blocking {
                blocking_writers.entry(var).or_default().insert(p.id);
            }
        }
    }

    let mut findings = Vec::new();
    for (var, pids) in &writers {
        if pids.len() > 1 {
            findings.push(RaceFinding {
                kind: RaceKind::MultiWriter,
                variables: vec![var.clone()],
                processes: pids.iter().copied().collect(),
                replay_seed: None,
            });
        }
    }
    for (var, wpids) in &blocking_writers {
        let mut readers: BTreeSet<ProcessId> = BTreeSet::new();
        for p in &program.processes {
            if p.body.read_vars().contains(var) && !wpids.contains(&p.id) {
                readers.insert(p.id);
            }
        }
        if !readers.is_empty() {
            findings.push(RaceFinding {
                kind: RaceKind::ReadWriteIntraCycle,
                variables: vec![var.clone()],
                processes: wpids.iter().chain(readers.iter()).copied().collect(),
                replay_seed: None,
            });
        }
    }
    RaceReport::from_findings(findings)
}

/// Runs `trials` random input schedules, each under two random same-priority
/// schedules, and reports end-of-cycle divergences. Runs that abort on an
/// unknown guard are skipped.
pub fn dynamic_differ(
    program: &Program,
    annots: &AnnotationSet,
    trials: u64,
    seed: u64,
) -> RaceReport {
    let mut findings = Vec::new();
    for trial in 0..trials {
        let trial_seed = seed.wrapping_add(trial);
        if let Some(vars) = divergence_for_seed(program, annots, trial_seed) {
            findings.push(RaceFinding {
                kind: RaceKind::DynamicDivergence,
                variables: vars,
                processes: vec![],
                replay_seed: Some(trial_seed),
            });
        }
    }
    RaceReport::from_findings(findings)
}

/// Replays one dynamic trial; returns the diverging variables, if any.
pub fn divergence_for_seed(
    program: &Program,
    annots: &AnnotationSet,
    trial_seed: u64,
) -> Option<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let mut sched = InputSchedule::new(DefaultPolicy::HoldPrevious);
    for r in enumerated_registers(program, annots) {
        let w = program.vars[&r].width.min(2);
        sched.set(0, r, rng.gen_range(0..(1u64 << w)));
    }
    let n_cycles = 4;
    let t_issue = Some(rng.gen_range(0..n_cycles));

    let mut order_a = ChaCha8Rng::seed_from_u64(rng.gen());
    let mut order_b = ChaCha8Rng::seed_from_u64(rng.gen());
    let a = run_scheduled(
        program,
        annots,
        &sched,
        t_issue,
        n_cycles,
        &mut Scheduler::Random(&mut order_a),
    );
    let b = run_scheduled(
        program,
        annots,
        &sched,
        t_issue,
        n_cycles,
        &mut Scheduler::Random(&mut order_b),
    );
    match (a, b) {
        (Ok(ta), Ok(tb)) => {
            if ta == tb {
                return None;
            }
            let mut vars = BTreeSet::new();
            for (ea, eb) in ta.entries.iter().zip(&tb.entries) {
                for v in ea.store.keys() {
                    if ea.store[v] != eb.store[v]
                        || ea.live[v] != eb.live[v]
                        || ea.influence[v] != eb.influence[v]
                    {
                        vars.insert(v.clone());
                    }
                }
            }
            Some(vars.into_iter().collect())
        }
        (Err(SimError::GuardUnknown { .. }), _) | (_, Err(SimError::GuardUnknown { .. })) => None,
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Expression as E, Process, ProcessKind, Statement as S, StorageClass, VarInfo};
    use crate::sim::tests::fpu_mul_program;

    fn regs(names: &[&str]) -> BTreeMap<String, VarInfo> {
        names
            .iter()
            .map(|n| {
                (
                    n.to_string(),
                    VarInfo {
                        name: n.to_string(),
                        class: StorageClass::Register,
                        width: 1,
                    },
                )
            })
            .collect()
    }

    /// Two processes non-blocking-assign the same register with different
    /// values.
    pub fn multi_writer_program() -> (Program, AnnotationSet) {
        let program = Program {
            processes: vec![
                Process {
                    id: 0,
                    kind: ProcessKind::Sequential,
                    body: S::NonBlockingAssign {
                        lhs: "out".into(),
                        rhs: E::int(0),
                    },
                },
                Process {
                    id: 1,
                    kind: ProcessKind::Sequential,
                    body: S::NonBlockingAssign {
                        lhs: "out".into(),
                        rhs: E::var("s"),
                    },
                },
            ],
            vars: regs(&["s", "out"]),
        };
        let annots = AnnotationSet {
            sources: ["s".to_string()].into_iter().collect(),
            sinks: ["out".to_string()].into_iter().collect(),
            initial_eq: vec![],
            always_eq: vec![],
        };
        (program, annots)
    }

    /// One process blocking-assigns `x`, another reads it in the same cycle.
    pub fn read_write_program() -> (Program, AnnotationSet) {
        let program = Program {
            processes: vec![
                Process {
                    id: 0,
                    kind: ProcessKind::Sequential,
                    body: S::BlockingAssign {
                        lhs: "x".into(),
                        rhs: E::var("s"),
                    },
                },
                Process {
                    id: 1,
                    kind: ProcessKind::Sequential,
                    body: S::NonBlockingAssign {
                        lhs: "y".into(),
                        rhs: E::var("x"),
                    },
                },
            ],
            vars: regs(&["s", "x", "y"]),
        };
        let annots = AnnotationSet {
            sources: ["s".to_string()].into_iter().collect(),
            sinks: ["y".to_string()].into_iter().collect(),
            initial_eq: vec![],
            always_eq: vec![],
        };
        (program, annots)
    }

    #[test]
    fn multi_writer_is_flagged() {
        let (p, _) = multi_writer_program();
        let r = static_races(&p);
        assert_eq!(r.verdict, RaceVerdict::Racy);
        assert_eq!(r.findings[0].kind, RaceKind::MultiWriter);
        assert_eq!(r.findings[0].variables, vec!["out".to_string()]);
        assert_eq!(r.findings[0].processes, vec![0, 1]);
    }

    #[test]
    fn cross_process_blocking_read_is_flagged() {
        let (p, _) = read_write_program();
        let r = static_races(&p);
        assert_eq!(r.verdict, RaceVerdict::Racy);
        assert!(r
            .findings
            .iter()
            .any(|f| f.kind == RaceKind::ReadWriteIntraCycle && f.variables == ["x"]));
    }

    #[test]
    fn the_multiplier_is_race_free() {
        let (p, a) = fpu_mul_program();
        assert!(static_races(&p).is_race_free());
        assert!(dynamic_differ(&p, &a, 50, 1).is_race_free());
    }

    #[test]
    fn dynamic_differ_finds_and_replays_races() {
        for (p, a) in [multi_writer_program(), read_write_program()] {
            let report = dynamic_differ(&p, &a, 100, 7);
            assert_eq!(report.verdict, RaceVerdict::Racy, "missed a race");
            let f = &report.findings[0];
            let seed = f.replay_seed.unwrap();
            let replay = divergence_for_seed(&p, &a, seed);
            assert_eq!(replay.as_deref(), Some(&f.variables[..]));
        }
    }

    #[test]
    fn zero_trials_zero_findings() {
        let (p, a) = multi_writer_program();
        assert!(dynamic_differ(&p, &a, 0, 0).is_race_free());
    }

    #[test]
    fn dynamic_findings_are_statically_flagged() {
        use rand::SeedableRng;
        // On racy samples the static check subsumes the dynamic one; on
        // generated race-free programs the differ stays quiet.
        for (p, a) in [multi_writer_program(), read_write_program()] {
            if !dynamic_differ(&p, &a, 60, 3).is_race_free() {
                assert_eq!(static_races(&p).verdict, RaceVerdict::Racy);
            }
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..15 {
            let (p, a) = crate::oracle::generate::random_program(&mut rng);
            assert!(static_races(&p).is_race_free());
            assert!(dynamic_differ(&p, &a, 20, 9).is_race_free());
        }
    }
}
