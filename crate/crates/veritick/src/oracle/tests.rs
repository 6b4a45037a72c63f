use std::collections::BTreeSet;

use super::*;
use crate::ir::{
    validate_program, Expression as E, Formula, FormulaAtom, Process, ProcessKind, Side,
    Statement as S, StorageClass, VarInfo,
};
use crate::sim::tests::fpu_mul_program;

fn with_assume_ct(annots: &AnnotationSet) -> AnnotationSet {
    let mut a = annots.clone();
    a.always_eq.push(Formula {
        atoms: vec![FormulaAtom::EqConst(Side::Both, "ct".into(), 1)],
    });
    a
}

/// `out <= in`: one source, one sink, nothing else.
fn passthrough() -> (Program, AnnotationSet) {
    let program = Program {
        processes: vec![Process {
            id: 0,
            kind: ProcessKind::Sequential,
            body: S::NonBlockingAssign {
                lhs: "out".into(),
                rhs: E::var("in"),
            },
        }],
        vars: ["in", "out"]
            .into_iter()
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
            .collect(),
    };
    let annots = AnnotationSet {
        sources: BTreeSet::from(["in".into()]),
        sinks: BTreeSet::from(["out".into()]),
        initial_eq: vec![],
        always_eq: vec![],
    };
    (program, annots)
}

#[test]
fn enumeration_count_matches_closed_form() {
    let (p, a) = passthrough();
    let cfg = OracleConfig::default();
    // `in` is the only read register, so the domain is 2 schedules and 4
    // ordered pairs.
    assert_eq!(schedule_count(&p, &a, &cfg), 2);
    let pairs = enumerate_pairs(&p, &a, &cfg).unwrap();
    assert_eq!(pairs.len(), 4);
}

#[test]
fn assumptions_filter_pairs() {
    let (p, a) = fpu_mul_program();
    let cfg = OracleConfig::default();
    // Domain: x, y (sources), ct (guard), stage1, flp_res (read registers).
    assert_eq!(schedule_count(&p, &a, &cfg), 32);
    let unconstrained = enumerate_pairs(&p, &a, &cfg).unwrap();
    assert_eq!(unconstrained.len(), 32 * 32);

    let ct1 = with_assume_ct(&a);
    let filtered = enumerate_pairs(&p, &ct1, &cfg).unwrap();
    // Only schedules with ct = 1 survive on both sides.
    assert_eq!(filtered.len(), 16 * 16);
    for (l, r) in &filtered {
        assert_eq!(l.get(0, "ct"), Some(1));
        assert_eq!(r.get(0, "ct"), Some(1));
    }
}

#[test]
fn init_eq_keeps_only_flushed_pairs() {
    let (p, mut a) = passthrough();
    a.initial_eq.push(Formula {
        atoms: vec![FormulaAtom::EqLR("in".into())],
    });
    let pairs = enumerate_pairs(&p, &a, &OracleConfig::default()).unwrap();
    assert_eq!(pairs.len(), 2);
    for (l, r) in &pairs {
        assert_eq!(l.get(0, "in"), r.get(0, "in"));
    }
}

#[test]
fn domain_beyond_budget_errors_without_sampling() {
    let (p, a) = fpu_mul_program();
    let cfg = OracleConfig {
        max_pairs: 10,
        ..OracleConfig::default()
    };
    assert!(matches!(
        enumerate_pairs(&p, &a, &cfg),
        Err(OracleError::DomainTooLarge { pairs: 1024, .. })
    ));
    let sampled = OracleConfig {
        max_pairs: 10,
        sample_seed: Some(7),
        ..OracleConfig::default()
    };
    assert!(enumerate_pairs(&p, &a, &sampled).is_ok());
}

#[test]
fn multiplier_violates_without_the_flag_assumption() {
    let (p, a) = fpu_mul_program();
    let v = brute_force_ct(&p, &a, &OracleConfig::default()).unwrap();
    assert!(!v.holds);
    let w = v.witness.expect("witness");
    // Pairs that disagree on the flag itself already diverge at cycle 1.
    assert_eq!(w.sink, "out");
    assert!(replay_witness(&p, &a, Property::ConstantTime, &w, 6).unwrap());

    let lv = brute_force_liveq(&p, &a, &OracleConfig::default()).unwrap();
    assert!(!lv.holds);
    let lw = lv.witness.expect("witness");
    assert!(replay_witness(&p, &a, Property::LivenessEquivalent, &lw, 6).unwrap());
    assert_eq!(lv.lemma_violations, 0);
}

#[test]
fn pinning_the_flag_low_exposes_the_slow_path_divergence() {
    // With ct fixed to 0 on both sides, the earliest divergence is the
    // fast-versus-slow pair at cycle 3 = k, differing in x.
    let (p, mut a) = fpu_mul_program();
    a.always_eq.push(Formula {
        atoms: vec![FormulaAtom::EqConst(Side::Both, "ct".into(), 0)],
    });
    let v = brute_force_ct(&p, &a, &OracleConfig::default()).unwrap();
    assert!(!v.holds);
    let w = v.witness.expect("witness");
    assert_eq!((w.cycle, w.sink.as_str()), (3, "out"));
    assert_ne!(w.left.get(0, "x"), w.right.get(0, "x"));
    assert_eq!(w.left.get(0, "ct"), Some(0));
    assert!(replay_witness(&p, &a, Property::ConstantTime, &w, 6).unwrap());

    let lv = brute_force_liveq(&p, &a, &OracleConfig::default()).unwrap();
    let lw = lv.witness.expect("witness");
    assert_eq!((lw.cycle, lw.sink.as_str()), (3, "out"));
    assert!(replay_witness(&p, &a, Property::LivenessEquivalent, &lw, 6).unwrap());
}

#[test]
fn multiplier_is_constant_time_under_the_flag() {
    let (p, a) = fpu_mul_program();
    let a = with_assume_ct(&a);
    let ct = brute_force_ct(&p, &a, &OracleConfig::default()).unwrap();
    assert!(ct.holds, "{:?}", ct.witness);
    assert_eq!(ct.pairs_checked, 256);
    let lv = brute_force_liveq(&p, &a, &OracleConfig::default()).unwrap();
    assert!(lv.holds, "{:?}", lv.witness);
    assert_eq!(lv.lemma_violations, 0);
}

#[test]
fn passthrough_is_constant_time() {
    let (p, a) = passthrough();
    assert!(brute_force_ct(&p, &a, &OracleConfig::default()).unwrap().holds);
    assert!(brute_force_liveq(&p, &a, &OracleConfig::default())
        .unwrap()
        .holds);
}

#[test]
fn generated_programs_are_well_formed() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    for _ in 0..40 {
        let (p, a) = generate::random_program(&mut rng);
        assert_eq!(validate_program(&p, &a), vec![]);
        assert!(p.processes.len() <= 3);
        assert!(p.registers().count() <= 4);
        assert!(p.wires().count() <= 2);
        // Round-trip through the textual format.
        let text = crate::ir::program_to_text(&p, &a);
        let (p2, a2) = crate::ir::parse_ir_text(&text).unwrap();
        assert_eq!(p, p2);
        assert_eq!(a, a2);
    }
}

#[test]
fn crosscheck_agrees_on_a_small_batch() {
    let report = theorem1_crosscheck(11, 10).unwrap();
    assert_eq!(report.programs, 10);
    assert!(
        report.disagreements.is_empty(),
        "{:#?}",
        report.disagreements
    );
    assert_eq!(report.lemma_violations, 0);
}

#[test]
fn crosscheck_on_zero_programs_is_empty() {
    let report = theorem1_crosscheck(1, 0).unwrap();
    assert_eq!(report.programs, 0);
    assert!(report.disagreements.is_empty());
}

#[test]
fn hand_built_violation_fails_both_checks() {
    // A secret-dependent branch: when the secret bit is set the sink gets a
    // pipelined value, otherwise a fresh one.
    let program = Program {
        processes: vec![
            Process {
                id: 0,
                kind: ProcessKind::Sequential,
                body: S::NonBlockingAssign {
                    lhs: "t1".into(),
                    rhs: E::var("m"),
                },
            },
            Process {
                id: 1,
                kind: ProcessKind::Sequential,
                body: S::IfThenElse {
                    cond: E::var("e"),
                    then_branch: Box::new(S::NonBlockingAssign {
                        lhs: "c".into(),
                        rhs: E::var("t1"),
                    }),
                    else_branch: Box::new(S::NonBlockingAssign {
                        lhs: "c".into(),
                        rhs: E::var("m"),
                    }),
                },
            },
        ],
        vars: ["e", "m", "t1", "c"]
            .into_iter()
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
            .collect(),
    };
    let annots = AnnotationSet {
        sources: BTreeSet::from(["e".into(), "m".into()]),
        sinks: BTreeSet::from(["c".into()]),
        initial_eq: vec![],
        always_eq: vec![],
    };
    let cfg = OracleConfig::default();
    let ct = brute_force_ct(&program, &annots, &cfg).unwrap();
    let lv = brute_force_liveq(&program, &annots, &cfg).unwrap();
    assert!(!ct.holds);
    assert!(!lv.holds);
}

#[test]
fn emptied_issue_cycles_check_nothing() {
    let (p, a) = fpu_mul_program();
    let cfg = OracleConfig {
        issue_cycles: Some(vec![]),
        ..OracleConfig::default()
    };
    let lv = brute_force_liveq(&p, &a, &cfg).unwrap();
    assert!(lv.holds);
    assert_eq!(lv.pairs_checked, 0);
}
