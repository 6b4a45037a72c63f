//! Syntactic transformations: the liveness shadow monitor and the lock-step
//! per-process product.
//!
//! Instrumentation gives every variable `x` a one-bit shadow `live$x` and
//! follows each assignment with a shadow assignment of the same kind. The
//! shadow right-hand side joins the shadows of the assigned expression's free
//! variables with the shadows of every guard on the path to the assignment,
//! so control dependencies taint exactly like data dependencies.
//!
//! The product renames an instrumented program into disjoint `$L`/`$R`
//! copies and merges each process by interleaving the copies statement by
//! statement. Race-freedom (checked separately) makes the lock-step schedule
//! as good as any other.

use std::collections::BTreeMap;

use crate::ir::{
    sym, AnnotationSet, Expression, Process, Program, Statement, StorageClass, VarInfo,
};
use crate::sim::InputSchedule;

pub fn shadow_name(var: &str) -> String {
    format!("live${var}")
}

pub fn left_name(var: &str) -> String {
    format!("{var}$L")
}

pub fn right_name(var: &str) -> String {
    format!("{var}$R")
}

/// A program extended with the liveness monitor.
#[derive(Debug, Clone)]
pub struct InstrumentedProgram {
    pub program: Program,
    pub annots: AnnotationSet,
    /// Original variable name to shadow variable name.
    pub shadow_of: BTreeMap<String, String>,
}

/// Lock-step product over doubled variables.
#[derive(Debug, Clone)]
pub struct ProductProgram {
    pub program: Program,
    /// Annotations of the original program, over original names. Assumption
    /// formulas are inherently two-run; sinks give rise to the assertion
    /// `live$s$L = live$s$R` at every cycle boundary.
    pub annots: AnnotationSet,
    pub shadow_of: BTreeMap<String, String>,
}

impl ProductProgram {
    /// Assertion targets per sink: `(sink, left shadow, right shadow)`.
    pub fn sink_assertions(&self) -> Vec<(String, String, String)> {
        self.annots
            .sinks
            .iter()
            .map(|s| {
                let sh = &self.shadow_of[s];
                (s.clone(), left_name(sh), right_name(sh))
            })
            .collect()
    }
}

/// The liveness join for an assignment of `e` under the given guard stack:
/// the or over the shadows of all free variables, `0` when there are none.
fn live_of(e: &Expression, guards: &[Expression]) -> Expression {
    let mut vars: Vec<String> = Vec::new();
    for v in e.free_vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    for g in guards {
        for v in g.free_vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
    }
    let mut terms = vars.into_iter().map(|v| Expression::var(shadow_name(&v)));
    match terms.next() {
        None => Expression::int(0),
        Some(first) => terms.fold(first, |acc, t| Expression::app(sym::LOG_OR, vec![acc, t])),
    }
}

fn instrument_stmt(s: &Statement, guards: &mut Vec<Expression>) -> Statement {
    match s {
        Statement::Skip => Statement::Skip,
        Statement::BlockingAssign { lhs, rhs } => Statement::Sequence(vec![
            s.clone(),
            Statement::BlockingAssign {
                lhs: shadow_name(lhs),
                rhs: live_of(rhs, guards),
            },
        ]),
        Statement::NonBlockingAssign { lhs, rhs } => Statement::Sequence(vec![
            s.clone(),
            Statement::NonBlockingAssign {
                lhs: shadow_name(lhs),
                rhs: live_of(rhs, guards),
            },
        ]),
        Statement::ContinuousAssign { lhs, rhs } => Statement::Sequence(vec![
            s.clone(),
            Statement::ContinuousAssign {
                lhs: shadow_name(lhs),
                rhs: live_of(rhs, guards),
            },
        ]),
        Statement::IfThenElse {
            cond,
            then_branch,
            else_branch,
        } => {
            guards.push(cond.clone());
            let t = instrument_stmt(then_branch, guards);
            let e = instrument_stmt(else_branch, guards);
            guards.pop();
            Statement::IfThenElse {
                cond: cond.clone(),
                then_branch: Box::new(t),
                else_branch: Box::new(e),
            }
        }
        Statement::Sequence(items) => {
            Statement::Sequence(items.iter().map(|i| instrument_stmt(i, guards)).collect())
        }
    }
}

/// Injects the shadow monitor. Original variables, sources, and sinks are
/// untouched; shadows are fresh one-bit variables of the same storage class.
pub fn instrument(program: &Program, annots: &AnnotationSet) -> InstrumentedProgram {
    let mut vars = program.vars.clone();
    let mut shadow_of = BTreeMap::new();
    for v in program.vars.values() {
        let sh = shadow_name(&v.name);
        vars.insert(
            sh.clone(),
            VarInfo {
                name: sh.clone(),
                class: v.class,
                width: 1,
            },
        );
        shadow_of.insert(v.name.clone(), sh);
    }
    let processes = program
        .processes
        .iter()
        .map(|p| Process {
            id: p.id,
            kind: p.kind,
            body: instrument_stmt(&p.body, &mut Vec::new()).normalize(),
        })
        .collect();
    InstrumentedProgram {
        program: Program { processes, vars },
        annots: annots.clone(),
        shadow_of,
    }
}

/// Builds the per-process product: each process body becomes, statement by
/// statement, the `$L` renaming followed by the `$R` renaming.
pub fn build_product(ip: &InstrumentedProgram) -> ProductProgram {
    let mut vars = BTreeMap::new();
    for v in ip.program.vars.values() {
        for name in [left_name(&v.name), right_name(&v.name)] {
            vars.insert(
                name.clone(),
                VarInfo {
                    name,
                    class: v.class,
                    width: v.width,
                },
            );
        }
    }
    let processes = ip
        .program
        .processes
        .iter()
        .map(|p| {
            let items: Vec<Statement> = match &p.body {
                Statement::Sequence(items) => items.clone(),
                Statement::Skip => vec![],
                other => vec![other.clone()],
            };
            let mut merged = Vec::new();
            for s in items {
                merged.push(s.rename_vars(&|v| left_name(v)));
                merged.push(s.rename_vars(&|v| right_name(v)));
            }
            Process {
                id: p.id,
                kind: p.kind,
                body: Statement::Sequence(merged).normalize(),
            }
        })
        .collect();
    ProductProgram {
        program: Program { processes, vars },
        annots: ip.annots.clone(),
        shadow_of: ip.shadow_of.clone(),
    }
}

/// Builds the input schedule for interpreting an instrumented program: the
/// base schedule plus dead shadow registers at cycle 0 and the issue bit
/// driven onto every shadow source at every cycle.
pub fn shadow_schedule(
    ip: &InstrumentedProgram,
    base: &InputSchedule,
    t_issue: Option<u32>,
    n_cycles: u32,
) -> InputSchedule {
    let mut sched = base.clone();
    for sh in ip.shadow_of.values() {
        if ip.program.vars[sh].class == StorageClass::Register {
            sched.set(0, sh.clone(), 0);
        }
    }
    for src in &ip.annots.sources {
        let sh = &ip.shadow_of[src];
        for c in 0..n_cycles {
            sched.set(c, sh.clone(), (t_issue == Some(c)) as u64);
        }
    }
    sched
}

/// Annotations and schedule for interpreting a product program directly:
/// both copies' sources are driven from their own schedules, with liveness
/// issued at the shared cycle.
pub fn product_run_setup(
    ip: &InstrumentedProgram,
    left: &InputSchedule,
    right: &InputSchedule,
    t_issue: Option<u32>,
    n_cycles: u32,
) -> (AnnotationSet, InputSchedule) {
    let mut annots = AnnotationSet::default();
    for s in &ip.annots.sources {
        annots.sources.insert(left_name(s));
        annots.sources.insert(right_name(s));
    }
    let mut sched = InputSchedule::new(left.default);
    for (base, rename) in [
        (left, left_name as fn(&str) -> String),
        (right, right_name as fn(&str) -> String),
    ] {
        let shadowed = shadow_schedule(ip, base, t_issue, n_cycles);
        for (cycle, row) in &shadowed.entries {
            for (var, val) in row {
                sched.set(*cycle, rename(var), *val);
            }
        }
    }
    (annots, sched)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{
        program_to_text, validate_program, Expression as E, ProcessKind, Statement as S,
    };
    use crate::sim::tests::{fpu_mul_program, fpu_mul_schedule};
    use crate::sim::{run, Value};
    use std::collections::BTreeSet;

    #[test]
    fn continuous_shadow_joins_operand_shadows() {
        let (p, a) = fpu_mul_program();
        let ip = instrument(&p, &a);
        let S::Sequence(items) = &ip.program.processes[0].body else {
            panic!("expected sequence")
        };
        assert_eq!(items.len(), 2);
        assert_eq!(
            items[1],
            S::ContinuousAssign {
                lhs: "live$iszero".into(),
                rhs: E::app(sym::LOG_OR, vec![E::var("live$x"), E::var("live$y")]),
            }
        );
    }

    #[test]
    fn guarded_assign_joins_guard_shadows() {
        let (p, a) = fpu_mul_program();
        let ip = instrument(&p, &a);
        // `out <= 0` sits under `ct` (else) and `iszero` (then); its shadow
        // joins exactly the two guard shadows.
        let mut found = false;
        ip.program.processes[2].body.visit(&mut |s| {
            if let S::NonBlockingAssign { lhs, rhs } = s {
                if lhs == "live$out"
                    && *rhs == E::app(sym::LOG_OR, vec![E::var("live$ct"), E::var("live$iszero")])
                {
                    found = true;
                }
            }
        });
        assert!(found, "fast-path shadow not found");
    }

    #[test]
    fn constant_assignment_has_dead_shadow() {
        let prog = Program {
            processes: vec![Process {
                id: 0,
                kind: ProcessKind::Sequential,
                body: S::BlockingAssign {
                    lhs: "a".into(),
                    rhs: E::int(5),
                },
            }],
            vars: [(
                "a".to_string(),
                VarInfo {
                    name: "a".into(),
                    class: StorageClass::Register,
                    width: 4,
                },
            )]
            .into_iter()
            .collect(),
        };
        let ip = instrument(&prog, &AnnotationSet::default());
        let S::Sequence(items) = &ip.program.processes[0].body else {
            panic!()
        };
        assert_eq!(
            items[1],
            S::BlockingAssign {
                lhs: "live$a".into(),
                rhs: E::int(0),
            }
        );
    }

    #[test]
    fn instrumented_and_product_programs_validate() {
        let (p, a) = fpu_mul_program();
        let ip = instrument(&p, &a);
        assert_eq!(validate_program(&ip.program, &ip.annots), vec![]);
        let pp = build_product(&ip);
        assert!(validate_program(&pp.program, &AnnotationSet::default()).is_empty());
    }

    #[test]
    fn product_interleaves_statement_pairs() {
        let (p, a) = fpu_mul_program();
        let pp = build_product(&instrument(&p, &a));
        let text = program_to_text(&pp.program, &AnnotationSet::default());
        let first = text
            .lines()
            .skip_while(|l| !l.starts_with("process 0"))
            .take(5)
            .collect::<Vec<_>>()
            .join("\n");
        assert_eq!(
            first,
            "process 0 continuous {\n  \
             assign iszero$L := x$L == 0 || y$L == 0;\n  \
             assign iszero$R := x$R == 0 || y$R == 0;\n  \
             assign live$iszero$L := live$x$L || live$y$L;\n  \
             assign live$iszero$R := live$x$R || live$y$R;"
        );
        assert_eq!(
            pp.sink_assertions(),
            vec![(
                "out".to_string(),
                "live$out$L".to_string(),
                "live$out$R".to_string()
            )]
        );
    }

    #[test]
    fn shadows_are_pure_observers() {
        let (p, a) = fpu_mul_program();
        let ip = instrument(&p, &a);
        let base = fpu_mul_schedule(1, 1, 0);
        let orig = run(&p, &a, &base, Some(0), 6).unwrap();
        let inst = run(
            &ip.program,
            &ip.annots,
            &shadow_schedule(&ip, &base, Some(0), 6),
            Some(0),
            6,
        )
        .unwrap();
        for (o, i) in orig.entries.iter().zip(&inst.entries) {
            for v in p.vars.keys() {
                assert_eq!(o.store[v], i.store[v], "value of {v}");
                assert_eq!(o.live[v], i.live[v], "intrinsic liveness of {v}");
                assert_eq!(o.influence[v], i.influence[v], "influence of {v}");
            }
        }
    }

    #[test]
    fn monitor_matches_intrinsic_liveness() {
        let (p, a) = fpu_mul_program();
        let ip = instrument(&p, &a);
        for (x, y, ct) in [(0, 1, 0), (1, 1, 0), (0, 0, 1), (1, 0, 1)] {
            for t in 0..4 {
                let base = fpu_mul_schedule(x, y, ct);
                let orig = run(&p, &a, &base, Some(t), 6).unwrap();
                let inst = run(
                    &ip.program,
                    &ip.annots,
                    &shadow_schedule(&ip, &base, Some(t), 6),
                    Some(t),
                    6,
                )
                .unwrap();
                for (o, i) in orig.entries.iter().zip(&inst.entries) {
                    for v in p.vars.keys() {
                        assert_eq!(
                            Value::bool(o.live[v]),
                            i.store[&shadow_name(v)],
                            "cycle {} var {v}",
                            o.cycle,
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn product_runs_project_to_instrumented_runs() {
        let (p, a) = fpu_mul_program();
        let ip = instrument(&p, &a);
        let pp = build_product(&ip);
        let left_base = fpu_mul_schedule(0, 1, 0);
        let right_base = fpu_mul_schedule(1, 1, 0);
        let (prod_annots, prod_sched) =
            product_run_setup(&ip, &left_base, &right_base, Some(0), 5);
        let prod = run(&pp.program, &prod_annots, &prod_sched, Some(0), 5).unwrap();

        let sides: [(&InputSchedule, fn(&str) -> String); 2] =
            [(&left_base, left_name), (&right_base, right_name)];
        for (base, rename) in sides {
            let inst = run(
                &ip.program,
                &ip.annots,
                &shadow_schedule(&ip, base, Some(0), 5),
                Some(0),
                5,
            )
            .unwrap();
            for (ie, pe) in inst.entries.iter().zip(&prod.entries) {
                for v in ip.program.vars.keys() {
                    assert_eq!(ie.store[v], pe.store[&rename(v)], "store of {v}");
                }
            }
        }
        let _ = BTreeSet::from([0u32]);
    }
}
