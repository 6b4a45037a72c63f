use super::*;
use crate::ir::{Formula, FormulaAtom, Side};
use crate::sim::tests::fpu_mul_program;
use crate::xform::{build_product, instrument};

fn fpu_product(assume_ct: Option<u64>) -> ProductProgram {
    let (p, mut a) = fpu_mul_program();
    if let Some(c) = assume_ct {
        a.always_eq.push(Formula {
            atoms: vec![FormulaAtom::EqConst(Side::Both, "ct".into(), c)],
        });
    }
    build_product(&instrument(&p, &a))
}

#[test]
fn transition_formula_constrains_each_register_once() {
    let pp = fpu_product(None);
    let tf = compile_cycle(&pp).unwrap();
    // Sources are havocked; everything else, including the cycle counter,
    // is defined exactly once.
    let sources = ["x$L", "x$R", "y$L", "y$R"];
    let Term::And(parts) = &tf.constraint else {
        panic!("expected conjunction")
    };
    for (name, w) in &tf.state {
        let post = post_sym(name, *w);
        let defs = parts
            .iter()
            .filter(|t| matches!(t, Term::Eq(a, _) if **a == post))
            .count();
        let expect = if sources.contains(&name.as_str()) { 0 } else { 1 };
        assert_eq!(defs, expect, "post definitions of {name}");
    }
}

#[test]
fn combinational_loop_is_reported() {
    use crate::ir::{Expression as E, Process, ProcessKind, Program, Statement as S};
    use std::collections::BTreeSet;
    let program = Program {
        processes: vec![
            Process {
                id: 0,
                kind: ProcessKind::Continuous,
                body: S::ContinuousAssign {
                    lhs: "a".into(),
                    rhs: E::app(crate::ir::sym::BIT_XOR, vec![E::var("b"), E::var("s")]),
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
        vars: [
            ("s", crate::ir::StorageClass::Register),
            ("a", crate::ir::StorageClass::Wire),
            ("b", crate::ir::StorageClass::Wire),
        ]
        .into_iter()
        .map(|(n, class)| {
            (
                n.to_string(),
                crate::ir::VarInfo {
                    name: n.to_string(),
                    class,
                    width: 1,
                },
            )
        })
        .collect(),
    };
    let annots = crate::ir::AnnotationSet {
        sources: BTreeSet::from(["s".into()]),
        sinks: BTreeSet::new(),
        initial_eq: vec![],
        always_eq: vec![],
    };
    let pp = build_product(&instrument(&program, &annots));
    match compile_cycle(&pp) {
        Err(VcError::CombinationalLoop { wires }) => {
            assert!(wires.iter().any(|w| w.starts_with('a') || w.starts_with('b')));
        }
        other => panic!("expected loop, got {other:?}"),
    }
}

#[test]
fn multiplier_verifies_under_the_flag() {
    let pp = fpu_product(Some(1));
    let hs = generate_horn(&pp).unwrap();
    let universe = predicate_universe(&pp, &[]);
    let v = houdini_solve(&hs, &universe, &SolverBackend::Builtin).unwrap();
    assert_eq!(v.result, VerifierResult::Verified, "dropped: {:?}", v.dropped);
    assert!(
        v.invariant
            .iter()
            .any(|p| p == "live$flp_res$L = live$flp_res$R"),
        "invariant: {:?}",
        v.invariant
    );
}

#[test]
fn multiplier_unconstrained_cannot_be_proved() {
    let pp = fpu_product(None);
    let hs = generate_horn(&pp).unwrap();
    let universe = predicate_universe(&pp, &[]);
    let v = houdini_solve(&hs, &universe, &SolverBackend::Builtin).unwrap();
    assert_eq!(v.result, VerifierResult::CannotProve);
    assert!(v.failing_clause.unwrap().contains("live$out"));
}

#[test]
fn empty_universe_cannot_prove_source_fed_sinks() {
    let pp = fpu_product(Some(1));
    let hs = generate_horn(&pp).unwrap();
    let v = houdini_solve(&hs, &[], &SolverBackend::Builtin).unwrap();
    assert_eq!(v.result, VerifierResult::CannotProve);
}

#[test]
fn bmc_finds_the_unconstrained_witness_and_nothing_under_the_flag() {
    let (p, a) = fpu_mul_program();
    let w = bmc_refute(&p, &a, 6, 1).unwrap().expect("witness");
    assert!(crate::oracle::replay_witness(
        &p,
        &a,
        crate::oracle::Property::LivenessEquivalent,
        &w,
        6
    )
    .unwrap());

    let mut a1 = a.clone();
    a1.always_eq.push(Formula {
        atoms: vec![FormulaAtom::EqConst(Side::Both, "ct".into(), 1)],
    });
    assert_eq!(bmc_refute(&p, &a1, 6, 1).unwrap(), None);
    assert_eq!(bmc_refute(&p, &a, 0, 1).unwrap(), None);
}

#[test]
fn houdini_shrinks_monotonically() {
    // The dropped set plus the surviving set partitions the universe.
    let pp = fpu_product(None);
    let hs = generate_horn(&pp).unwrap();
    let universe = predicate_universe(&pp, &[]);
    let v = houdini_solve(&hs, &universe, &SolverBackend::Builtin).unwrap();
    assert_eq!(v.invariant.len() + v.dropped.len(), universe.len());
    for label in &v.invariant {
        assert!(universe.iter().any(|p| p.label == *label));
    }
}

#[test]
fn smtlib_emission_is_deterministic_and_well_shaped() {
    let pp = fpu_product(Some(1));
    let hs = generate_horn(&pp).unwrap();
    let a = smtlib::emit_smtlib(&hs);
    let b = smtlib::emit_smtlib(&generate_horn(&pp).unwrap());
    assert_eq!(a, b);
    assert!(a.starts_with("(set-logic HORN)\n"));
    assert!(a.ends_with("(check-sat)\n"));
    // Relation arity: doubled registers and their shadows, the cycle
    // counter, and the issue time.
    let regs = pp.program.registers().count();
    let arity = regs + 2;
    let decl = a.lines().find(|l| l.starts_with("(declare-fun inv")).unwrap();
    assert_eq!(decl.matches("(_ BitVec").count(), arity);
    // Balanced parentheses.
    let mut depth = 0i64;
    for c in a.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        assert!(depth >= 0);
    }
    assert_eq!(depth, 0);
}

#[test]
fn external_backend_plumbing() {
    let t = Term::eq(Term::var("a", 2), Term::var("a", 2));
    let f = Term::eq(Term::var("a", 2), Term::var("b", 2));
    let yes = SolverBackend::External {
        command: "cat >/dev/null; echo unsat".into(),
    };
    assert_eq!(
        yes.check_implication(&Term::True, &t).unwrap(),
        CheckOutcome::Valid
    );
    let no = SolverBackend::External {
        command: "cat >/dev/null; echo sat".into(),
    };
    assert_eq!(
        no.check_implication(&Term::True, &f).unwrap(),
        CheckOutcome::CounterModel
    );
    let confused = SolverBackend::External {
        command: "cat >/dev/null; echo maybe".into(),
    };
    assert_eq!(
        confused.check_implication(&Term::True, &t).unwrap(),
        CheckOutcome::Unknown
    );
    let missing = SolverBackend::External {
        command: "/nonexistent/solver-binary".into(),
    };
    assert!(missing.check_implication(&Term::True, &t).is_err());
}

/// When a real SMT solver is configured in the environment, the external
/// backend must agree with the built-in one on a formula corpus.
#[test]
fn backends_agree_when_external_solver_available() {
    let Ok(cmd) = std::env::var("VERITICK_SMT_SOLVER") else {
        eprintln!("VERITICK_SMT_SOLVER not set; skipping agreement corpus");
        return;
    };
    let external = SolverBackend::External { command: cmd };
    let builtin = SolverBackend::Builtin;
    let a2 = Term::var("a", 2);
    let b2 = Term::var("b", 2);
    let fx = Term::App {
        func: "f/2".into(),
        width: 2,
        args: vec![a2.clone()],
    };
    let fy = Term::App {
        func: "f/2".into(),
        width: 2,
        args: vec![b2.clone()],
    };
    let corpus: Vec<(Term, Term)> = vec![
        (Term::True, Term::eq(a2.clone(), a2.clone())),
        (Term::True, Term::eq(a2.clone(), b2.clone())),
        (
            Term::eq(a2.clone(), b2.clone()),
            Term::eq(fx.clone(), fy.clone()),
        ),
        (Term::eq(fx, fy), Term::eq(a2.clone(), b2.clone())),
        (
            Term::Ult(Box::new(a2.clone()), Box::new(b2.clone())),
            Term::not(Term::eq(a2, b2)),
        ),
    ];
    for (ante, cons) in corpus {
        let x = builtin.check_implication(&ante, &cons).unwrap();
        let y = external.check_implication(&ante, &cons).unwrap();
        assert_eq!(x, y, "backends disagree on {ante:?} => {cons:?}");
    }
}
