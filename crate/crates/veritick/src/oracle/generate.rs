//! Random well-formed, race-free programs for differential testing.
//!
//! The generator keeps to the fragment the rest of the tool accepts without
//! caveats: wires form a DAG rooted in the sources, every variable is
//! assigned in at most one process, register updates are non-blocking, and
//! anything a guard reads has a defined value from cycle 0 on.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use std::collections::BTreeMap;

use crate::ir::{
    sym, AnnotationSet, Expression, Formula, FormulaAtom, Process, ProcessKind, Program, Side,
    Statement, StorageClass, VarInfo,
};

struct Pool {
    sources: Vec<String>,
    regs: Vec<String>,
    wires: Vec<String>,
}

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &'a [String]) -> &'a str {
    &xs[rng.gen_range(0..xs.len())]
}

/// An expression over the given operands, at most `depth` operators deep.
fn random_expr(rng: &mut ChaCha8Rng, operands: &[String], depth: u8) -> Expression {
    if depth == 0 || rng.gen_bool(0.35) {
        return if rng.gen_bool(0.8) {
            Expression::var(pick(rng, operands))
        } else {
            Expression::int(rng.gen_range(0..2))
        };
    }
    let ops2 = [
        sym::EQ,
        sym::NE,
        sym::LOG_AND,
        sym::LOG_OR,
        sym::BIT_XOR,
        sym::BIT_AND,
        sym::BIT_OR,
    ];
    if rng.gen_bool(0.15) {
        Expression::app(
            sym::LOG_NOT,
            vec![random_expr(rng, operands, depth - 1)],
        )
    } else {
        let op = ops2[rng.gen_range(0..ops2.len())];
        Expression::app(
            op,
            vec![
                random_expr(rng, operands, depth - 1),
                random_expr(rng, operands, depth - 1),
            ],
        )
    }
}

/// A guard always reads at least one variable, so issue liveness can reach
/// control decisions.
fn random_guard(rng: &mut ChaCha8Rng, operands: &[String]) -> Expression {
    let base = Expression::var(pick(rng, operands));
    if rng.gen_bool(0.5) {
        base
    } else {
        Expression::app(
            [sym::EQ, sym::NE, sym::LOG_AND, sym::BIT_XOR][rng.gen_range(0..4)],
            vec![base, random_expr(rng, operands, 1)],
        )
    }
}

fn random_body(
    rng: &mut ChaCha8Rng,
    targets: &[String],
    operands: &[String],
    depth: u8,
) -> Statement {
    let n = rng.gen_range(1..=targets.len().min(2));
    let mut items = Vec::new();
    for i in 0..n {
        let lhs = targets[i].clone();
        if depth > 0 && rng.gen_bool(0.4) {
            items.push(Statement::IfThenElse {
                cond: random_guard(rng, operands),
                then_branch: Box::new(Statement::NonBlockingAssign {
                    lhs: lhs.clone(),
                    rhs: random_expr(rng, operands, 2),
                }),
                else_branch: Box::new(if rng.gen_bool(0.7) {
                    Statement::NonBlockingAssign {
                        lhs,
                        rhs: random_expr(rng, operands, 2),
                    }
                } else {
                    Statement::Skip
                }),
            });
        } else {
            items.push(Statement::NonBlockingAssign {
                lhs,
                rhs: random_expr(rng, operands, 2),
            });
        }
    }
    Statement::Sequence(items).normalize()
}

/// One random race-free program over a one-bit domain, with random
/// annotations: at most three processes, four registers, and two wires.
pub fn random_program(rng: &mut ChaCha8Rng) -> (Program, AnnotationSet) {
    let n_sources = rng.gen_range(1..=2);
    let n_regs = rng.gen_range(1..=(4 - n_sources));
    let n_wires = rng.gen_range(0..=2u32.min(2));

    let pool = Pool {
        sources: (0..n_sources).map(|i| format!("in{i}")).collect(),
        regs: (0..n_regs).map(|i| format!("r{i}")).collect(),
        wires: (0..n_wires).map(|i| format!("w{i}")).collect(),
    };

    let mut vars: BTreeMap<String, VarInfo> = BTreeMap::new();
    for s in pool.sources.iter().chain(&pool.regs) {
        vars.insert(
            s.clone(),
            VarInfo {
                name: s.clone(),
                class: StorageClass::Register,
                width: 1,
            },
        );
    }
    for w in &pool.wires {
        vars.insert(
            w.clone(),
            VarInfo {
                name: w.clone(),
                class: StorageClass::Wire,
                width: 1,
            },
        );
    }

    let mut processes = Vec::new();
    let mut next_id = 0u32;

    // Wires read sources and earlier wires only, which keeps them in the
    // source-triggered cone and acyclic.
    let mut wire_operands: Vec<String> = pool.sources.clone();
    for w in &pool.wires {
        let rhs = {
            let base = Expression::var(pick(rng, &wire_operands));
            if rng.gen_bool(0.5) {
                base
            } else {
                Expression::app(
                    [sym::EQ, sym::LOG_OR, sym::BIT_XOR, sym::LOG_AND][rng.gen_range(0..4)],
                    vec![base, random_expr(rng, &wire_operands, 1)],
                )
            }
        };
        processes.push(Process {
            id: next_id,
            kind: ProcessKind::Continuous,
            body: Statement::ContinuousAssign {
                lhs: w.clone(),
                rhs,
            },
        });
        next_id += 1;
        wire_operands.push(w.clone());
    }

    // Registers are partitioned among the sequential processes, so every
    // variable has a single writer.
    let mut operands: Vec<String> = pool
        .sources
        .iter()
        .chain(&pool.regs)
        .chain(&pool.wires)
        .cloned()
        .collect();
    operands.dedup();
    let seq_budget = (3 - processes.len().min(2)).max(1);
    let n_seq = rng.gen_range(1..=seq_budget.min(pool.regs.len()));
    let mut targets: Vec<Vec<String>> = vec![Vec::new(); n_seq];
    for (i, r) in pool.regs.iter().enumerate() {
        targets[i % n_seq].push(r.clone());
    }
    for t in targets {
        processes.push(Process {
            id: next_id,
            kind: ProcessKind::Sequential,
            body: random_body(rng, &t, &operands, 2),
        });
        next_id += 1;
    }

    let mut annots = AnnotationSet {
        sources: pool.sources.iter().cloned().collect(),
        sinks: Default::default(),
        initial_eq: vec![],
        always_eq: vec![],
    };
    let n_sinks = rng.gen_range(1..=pool.regs.len().min(2));
    for i in 0..n_sinks {
        annots.sinks.insert(pool.regs[i].clone());
    }
    if rng.gen_bool(0.3) {
        annots.initial_eq.push(Formula {
            atoms: vec![FormulaAtom::EqLR(pick(rng, &pool.regs).to_string())],
        });
    }
    if rng.gen_bool(0.25) {
        annots.always_eq.push(Formula {
            atoms: vec![FormulaAtom::EqLR(pick(rng, &pool.sources).to_string())],
        });
    }
    if rng.gen_bool(0.15) {
        annots.always_eq.push(Formula {
            atoms: vec![FormulaAtom::EqConst(
                Side::Both,
                pick(rng, &pool.regs).to_string(),
                rng.gen_range(0..2),
            )],
        });
    }

    (Program { processes, vars }, annots)
}
