use std::collections::BTreeSet;

use super::*;
use crate::ir::{
    sym, Expression as E, Process, ProcessKind, Program, Statement as S, StorageClass, VarInfo,
};

fn reg(name: &str) -> (String, VarInfo) {
    (
        name.to_string(),
        VarInfo {
            name: name.to_string(),
            class: StorageClass::Register,
            width: 1,
        },
    )
}

fn wire(name: &str) -> (String, VarInfo) {
    (
        name.to_string(),
        VarInfo {
            name: name.to_string(),
            class: StorageClass::Wire,
            width: 1,
        },
    )
}

/// The running multiplier example with a two-stage slow path, so the slow
/// result takes three cycles from input to sink.
pub fn fpu_mul_program() -> (Program, AnnotationSet) {
    let iszero = E::app(
        sym::LOG_OR,
        vec![
            E::app(sym::EQ, vec![E::var("x"), E::int(0)]),
            E::app(sym::EQ, vec![E::var("y"), E::int(0)]),
        ],
    );
    let p0 = Process {
        id: 0,
        kind: ProcessKind::Continuous,
        body: S::ContinuousAssign {
            lhs: "iszero".into(),
            rhs: iszero,
        },
    };
    let p1 = Process {
        id: 1,
        kind: ProcessKind::Sequential,
        body: S::Sequence(vec![
            S::NonBlockingAssign {
                lhs: "stage1".into(),
                rhs: E::app(sym::MUL, vec![E::var("x"), E::var("y")]),
            },
            S::NonBlockingAssign {
                lhs: "flp_res".into(),
                rhs: E::var("stage1"),
            },
        ]),
    };
    let p2 = Process {
        id: 2,
        kind: ProcessKind::Sequential,
        body: S::IfThenElse {
            cond: E::var("ct"),
            then_branch: Box::new(S::NonBlockingAssign {
                lhs: "out".into(),
                rhs: E::var("flp_res"),
            }),
            else_branch: Box::new(S::IfThenElse {
                cond: E::var("iszero"),
                then_branch: Box::new(S::NonBlockingAssign {
                    lhs: "out".into(),
                    rhs: E::int(0),
                }),
                else_branch: Box::new(S::NonBlockingAssign {
                    lhs: "out".into(),
                    rhs: E::var("flp_res"),
                }),
            }),
        },
    };
    let program = Program {
        processes: vec![p0, p1, p2],
        vars: [
            reg("x"),
            reg("y"),
            reg("ct"),
            reg("stage1"),
            reg("flp_res"),
            reg("out"),
            wire("iszero"),
        ]
        .into_iter()
        .collect(),
    };
    let annots = AnnotationSet {
        sources: BTreeSet::from(["x".into(), "y".into()]),
        sinks: BTreeSet::from(["out".into()]),
        initial_eq: vec![],
        always_eq: vec![],
    };
    (program, annots)
}

pub fn fpu_mul_schedule(x: u64, y: u64, ct: u64) -> InputSchedule {
    let mut s = InputSchedule::new(DefaultPolicy::HoldPrevious);
    s.set(0, "x", x).set(0, "y", y).set(0, "ct", ct);
    s
}

fn infl(e: &TraceEntry, v: &str) -> CycleSet {
    e.influence[v].clone()
}

#[test]
fn fast_path_run_matches_reference_tables() {
    let (p, a) = fpu_mul_program();
    let trace = run(&p, &a, &fpu_mul_schedule(0, 1, 0), Some(0), 4).unwrap();

    // Sources are influenced by the current cycle only and live at issue.
    for (i, e) in trace.entries.iter().enumerate() {
        assert_eq!(infl(e, "x"), CycleSet::from([i as u32]));
        assert_eq!(infl(e, "y"), CycleSet::from([i as u32]));
        assert_eq!(e.live["x"], i == 0);
        assert!(infl(e, "ct").is_empty());
    }

    // Cycle 0: nothing has reached the sink yet.
    assert_eq!(trace.entries[0].store["out"], Value::Unknown);
    assert!(infl(&trace.entries[0], "out").is_empty());
    assert!(!trace.entries[0].live["out"]);

    // Cycle 1: the fast path wrote `out` under a control dependency on the
    // inputs issued at cycle 0.
    assert_eq!(trace.entries[1].store["out"], Value::bits(1, 0));
    assert_eq!(infl(&trace.entries[1], "out"), CycleSet::from([0]));
    assert!(trace.entries[1].live["out"]);

    // Cycle 2: the slow path result is ready in flp_res, still carrying the
    // cycle-0 inputs; out has moved on.
    assert_eq!(infl(&trace.entries[2], "flp_res"), CycleSet::from([0]));
    assert!(trace.entries[2].live["flp_res"]);
    assert_eq!(infl(&trace.entries[2], "out"), CycleSet::from([1]));
    assert!(!trace.entries[2].live["out"]);

    // Cycle 3: the fast path keeps winning, so out never picks up cycle 0
    // again.
    assert_eq!(infl(&trace.entries[3], "out"), CycleSet::from([2]));
    assert!(!trace.entries[3].live["out"]);
    assert_eq!(infl(&trace.entries[3], "flp_res"), CycleSet::from([1]));
    assert!(!trace.entries[3].live["flp_res"]);
}

#[test]
fn slow_path_run_picks_up_the_issue_cycle() {
    let (p, a) = fpu_mul_program();
    let trace = run(&p, &a, &fpu_mul_schedule(1, 1, 0), Some(0), 4).unwrap();

    assert_eq!(trace.entries[1].store["out"], Value::Unknown);
    assert_eq!(infl(&trace.entries[1], "out"), CycleSet::from([0]));
    assert!(trace.entries[1].live["out"]);

    // Cycle 3 = k: the slow-path value lands in out, so the influence set
    // gains the extra cycle 0 and out is live again.
    assert_eq!(trace.entries[3].store["out"], Value::bits(1, 1));
    assert_eq!(infl(&trace.entries[3], "out"), CycleSet::from([0, 2]));
    assert!(trace.entries[3].live["out"]);
}

#[test]
fn the_two_runs_witness_the_violation() {
    let (p, a) = fpu_mul_program();
    let fast = run(&p, &a, &fpu_mul_schedule(0, 1, 0), Some(0), 4).unwrap();
    let slow = run(&p, &a, &fpu_mul_schedule(1, 1, 0), Some(0), 4).unwrap();
    assert!(!check_ct_pair(&fast, &slow, &a.sinks).unwrap());
    assert!(!check_liveq_pair(&fast, &slow, &a.sinks).unwrap());
    assert_eq!(ct_divergence(&fast, &slow, &a.sinks), Some((3, "out".into())));
    assert_eq!(
        liveq_divergence(&fast, &slow, &a.sinks),
        Some((3, "out".into()))
    );
    assert!(check_ct_pair(&fast, &fast, &a.sinks).unwrap());
    assert!(check_liveq_pair(&slow, &slow, &a.sinks).unwrap());
}

#[test]
fn constant_time_mode_agrees_across_operands() {
    let (p, a) = fpu_mul_program();
    let l = run(&p, &a, &fpu_mul_schedule(0, 1, 1), Some(0), 6).unwrap();
    let r = run(&p, &a, &fpu_mul_schedule(1, 1, 1), Some(0), 6).unwrap();
    assert!(check_ct_pair(&l, &r, &a.sinks).unwrap());
    assert!(check_liveq_pair(&l, &r, &a.sinks).unwrap());
}

#[test]
fn lemma_live_implies_influence_on_both_runs() {
    let (p, a) = fpu_mul_program();
    for (x, ct) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        for t in 0..4 {
            let trace = run(&p, &a, &fpu_mul_schedule(x, 1, ct), Some(t), 6).unwrap();
            assert!(trace.live_implies_influence(t).is_empty());
        }
    }
}

#[test]
fn wires_never_keep_stale_values() {
    let (p, a) = fpu_mul_program();
    let trace = run(&p, &a, &fpu_mul_schedule(0, 1, 0), None, 4).unwrap();
    // iszero is recomputed from the driven sources before each snapshot.
    for e in &trace.entries {
        assert_eq!(e.store["iszero"], Value::bits(1, 1));
    }
}

#[test]
fn unknown_guard_aborts_the_run() {
    let (p, a) = fpu_mul_program();
    // No value for ct: the branch on it cannot be resolved.
    let mut s = InputSchedule::new(DefaultPolicy::HoldPrevious);
    s.set(0, "x", 0).set(0, "y", 1);
    let err = run(&p, &a, &s, Some(0), 3).unwrap_err();
    assert_eq!(
        err,
        SimError::GuardUnknown {
            process: 2,
            cycle: 0
        }
    );
}

#[test]
fn combinational_loops_are_reported() {
    let program = Program {
        processes: vec![
            Process {
                id: 0,
                kind: ProcessKind::Continuous,
                body: S::ContinuousAssign {
                    lhs: "a".into(),
                    rhs: E::app(sym::BIT_XOR, vec![E::var("b"), E::var("s")]),
                },
            },
            Process {
                id: 1,
                kind: ProcessKind::Continuous,
                body: S::ContinuousAssign {
                    lhs: "b".into(),
                    rhs: E::var("a"),
                },
            },
        ],
        vars: [reg("s"), wire("a"), wire("b")].into_iter().collect(),
    };
    let annots = AnnotationSet {
        sources: BTreeSet::from(["s".into()]),
        sinks: BTreeSet::new(),
        initial_eq: vec![],
        always_eq: vec![],
    };
    let mut sched = InputSchedule::new(DefaultPolicy::HoldPrevious);
    sched.set(0, "s", 1);
    let err = run(&program, &annots, &sched, None, 2).unwrap_err();
    assert!(matches!(err, SimError::CombinationalLoop { .. }));
}

#[test]
fn schedule_may_not_target_wires() {
    let (p, a) = fpu_mul_program();
    let mut s = fpu_mul_schedule(0, 1, 0);
    s.set(0, "iszero", 1);
    assert_eq!(
        run(&p, &a, &s, None, 2).unwrap_err(),
        SimError::ScheduleTarget {
            name: "iszero".into()
        }
    );
}

#[test]
fn randomized_schedules_agree_on_race_free_programs() {
    use rand::SeedableRng;
    let (p, a) = fpu_mul_program();
    let inputs = fpu_mul_schedule(1, 1, 0);
    let reference = run(&p, &a, &inputs, Some(0), 5).unwrap();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = run_scheduled(
            &p,
            &a,
            &inputs,
            Some(0),
            5,
            &mut Scheduler::Random(&mut rng),
        )
        .unwrap();
        assert_eq!(reference, t, "seed {seed} diverged");
    }
}
