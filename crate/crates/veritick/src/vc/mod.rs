//! Verification conditions and invariant inference.
//!
//! One clock cycle of the product program is compiled into a transition
//! formula by single-assignment versioning: wires are havocked and the
//! source-triggered ones recomputed in dependency order, sequential bodies
//! run in canonical process order with branches merged through if-then-else
//! terms, deferred assignments land at the end of the cycle, and finally the
//! environment drives fresh source values and the issue-cycle comparison
//! into the source shadows.
//!
//! The Horn system asks for one relational invariant over the register state
//! that covers the initial states, is preserved by the transition under the
//! channel assumptions, and implies equal sink shadows. It is solved by
//! conjunctive fixpoint: start from a universe of candidate equalities and
//! drop whatever fails until everything left is inductive.
//!
//! Guard-level operators are bit-blasted at their declared widths; the wide
//! datapath operators `+`, `-`, `*`, and any unfamiliar function symbol stay
//! uninterpreted with congruence. Timing never depends on what a multiplier
//! returns, only on which guards fire.

mod backend;
mod blast;
mod sat;
pub mod smtlib;
mod term;

pub use backend::{CheckOutcome, SolverBackend, SolverUnavailable};
pub use term::{Sort, Term};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{sym, AnnotationSet, Expression, Formula, FormulaAtom, ProcessKind, Side, Statement};
use crate::oracle::{self, OracleConfig, Witness};
use crate::xform::{left_name, right_name, ProductProgram};

/// Width of the abstract cycle counter and the symbolic issue time.
pub const CYCLE_WIDTH: u8 = 8;
/// Pseudo state variable holding the cycle counter.
pub const CYCLE_VAR: &str = "@cycle";
/// Free symbol naming the arbitrary issue cycle.
pub const ISSUE_VAR: &str = "@issue";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VcError {
    #[error("combinational loop through wires: {}", wires.join(", "))]
    CombinationalLoop { wires: Vec<String> },
    #[error(
        "wire `{wire}` is never triggered by a source; its value would be unknown every cycle"
    )]
    UntriggeredWire { wire: String },
    #[error("wire `{wire}` reads `{reg}`, which is blocking-assigned; in-cycle refires are outside the transition encoding")]
    WireReadsBlockingTarget { wire: String, reg: String },
    #[error("assumption formula refers to `{var}`, which is not a register")]
    FormulaOnWire { var: String },
    #[error("expression widens past 64 bits")]
    TooWide,
}

/// One clock cycle as a constraint between `.pre` and `.post` register
/// vectors. Post-state variables are each constrained exactly once, except
/// source registers, which are left unconstrained as the environment havoc.
#[derive(Debug, Clone)]
pub struct TransitionFormula {
    /// Register layout, sorted by name, with the cycle counter last.
    pub state: Vec<(String, u8)>,
    pub constraint: Term,
}

pub fn pre_sym(name: &str, width: u8) -> Term {
    Term::var(format!("{name}.pre"), width)
}

pub fn post_sym(name: &str, width: u8) -> Term {
    Term::var(format!("{name}.post"), width)
}

struct CycleEncoder<'p> {
    pp: &'p ProductProgram,
    defs: Vec<Term>,
    cur: BTreeMap<String, Term>,
    fresh: u32,
}

impl<'p> CycleEncoder<'p> {
    fn define(&mut self, hint: &str, t: Term, width: u8) -> Term {
        let name = format!("{hint}!{}", self.fresh);
        self.fresh += 1;
        let v = Term::var(name, width);
        self.defs.push(Term::eq(v.clone(), Term::resize(t, width)));
        v
    }

    fn width_of(&self, e: &Expression) -> u8 {
        match e {
            Expression::VarRef(v) => self.pp.program.vars[v].width,
            Expression::ConstInt(_) => 64,
            Expression::FunApp(s, args) => {
                let ws: Vec<u8> = args.iter().map(|a| self.width_of(a)).collect();
                let max = ws.iter().copied().max().unwrap_or(1);
                match s.as_str() {
                    sym::EQ | sym::NE | sym::LT | sym::LE | sym::GT | sym::GE | sym::LOG_AND
                    | sym::LOG_OR | sym::LOG_NOT | sym::SELECT => 1,
                    sym::BIT_NOT | sym::SHL | sym::SHR => ws[0],
                    sym::CONCAT => ws.iter().map(|w| *w as u32).sum::<u32>().min(255) as u8,
                    sym::PART => match (&args[1], &args[2]) {
                        (Expression::ConstInt(hi), Expression::ConstInt(lo)) if hi >= lo => {
                            (hi - lo + 1).min(255) as u8
                        }
                        _ => 1,
                    },
                    _ => max,
                }
            }
        }
    }

    fn enc_bool(&mut self, e: &Expression) -> Result<Term, VcError> {
        Ok(Term::bv_to_bool(self.enc(e)?))
    }

    fn enc(&mut self, e: &Expression) -> Result<Term, VcError> {
        match e {
            Expression::VarRef(v) => Ok(self.cur[v].clone()),
            Expression::ConstInt(n) => Ok(Term::bv(64, *n)),
            Expression::FunApp(s, args) => self.enc_app(s, args),
        }
    }

    fn enc_app(&mut self, s: &str, args: &[Expression]) -> Result<Term, VcError> {
        let cmp = |a: Term, b: Term, f: fn(Box<Term>, Box<Term>) -> Term| {
            Term::bool_to_bv(f(Box::new(a), Box::new(b)))
        };
        match (s, args) {
            (sym::EQ, [a, b]) => {
                let (a, b) = (self.enc(a)?, self.enc(b)?);
                Ok(Term::bool_to_bv(Term::eq(a, b)))
            }
            (sym::NE, [a, b]) => {
                let (a, b) = (self.enc(a)?, self.enc(b)?);
                Ok(Term::bool_to_bv(Term::not(Term::eq(a, b))))
            }
            (sym::LT, [a, b]) => Ok(cmp(self.enc(a)?, self.enc(b)?, Term::Ult)),
            (sym::GT, [a, b]) => Ok(cmp(self.enc(b)?, self.enc(a)?, Term::Ult)),
            (sym::LE, [a, b]) => Ok(cmp(self.enc(a)?, self.enc(b)?, Term::Ule)),
            (sym::GE, [a, b]) => Ok(cmp(self.enc(b)?, self.enc(a)?, Term::Ule)),
            (sym::LOG_AND, [a, b]) => {
                let (a, b) = (self.enc_bool(a)?, self.enc_bool(b)?);
                Ok(Term::bool_to_bv(Term::and(vec![a, b])))
            }
            (sym::LOG_OR, [a, b]) => {
                let (a, b) = (self.enc_bool(a)?, self.enc_bool(b)?);
                Ok(Term::bool_to_bv(Term::or2(a, b)))
            }
            (sym::LOG_NOT, [a]) => {
                let a = self.enc_bool(a)?;
                Ok(Term::bool_to_bv(Term::not(a)))
            }
            (sym::BIT_AND | sym::BIT_OR | sym::BIT_XOR, [a, b]) => {
                let w = self.width_of(&Expression::FunApp(s.to_string(), args.to_vec()));
                let (a, b) = (
                    Term::resize(self.enc(a)?, w),
                    Term::resize(self.enc(b)?, w),
                );
                Ok(match s {
                    sym::BIT_AND => Term::BvAnd(Box::new(a), Box::new(b)),
                    sym::BIT_OR => Term::BvOr(Box::new(a), Box::new(b)),
                    _ => Term::BvXor(Box::new(a), Box::new(b)),
                })
            }
            (sym::BIT_NOT, [a]) => Ok(Term::BvNot(Box::new(self.enc(a)?))),
            (sym::SHL | sym::SHR, [a, Expression::ConstInt(by)]) => {
                let a = self.enc(a)?;
                let by = (*by).min(255) as u8;
                Ok(if s == sym::SHL {
                    Term::ShlConst {
                        arg: Box::new(a),
                        by,
                    }
                } else {
                    Term::ShrConst {
                        arg: Box::new(a),
                        by,
                    }
                })
            }
            (sym::MUX, [c, t, f]) => {
                let w = self.width_of(&Expression::FunApp(s.to_string(), args.to_vec()));
                let c = self.enc_bool(c)?;
                let (t, f) = (
                    Term::resize(self.enc(t)?, w),
                    Term::resize(self.enc(f)?, w),
                );
                Ok(Term::Ite {
                    cond: Box::new(c),
                    then: Box::new(t),
                    els: Box::new(f),
                })
            }
            (sym::CONCAT, parts) if !parts.is_empty() => {
                let total: u32 = parts.iter().map(|p| self.width_of(p) as u32).sum();
                if total > 64 {
                    return Err(VcError::TooWide);
                }
                let enc: Result<Vec<Term>, VcError> =
                    parts.iter().map(|p| self.enc(p)).collect();
                Ok(Term::Concat(enc?))
            }
            (sym::SELECT, [a, Expression::ConstInt(i)]) => {
                let wa = self.width_of(a);
                if *i >= wa as u64 {
                    return Ok(Term::bv(1, 0));
                }
                Ok(Term::Extract {
                    arg: Box::new(self.enc(a)?),
                    hi: *i as u8,
                    lo: *i as u8,
                })
            }
            (sym::PART, [a, Expression::ConstInt(hi), Expression::ConstInt(lo)]) => {
                let wa = self.width_of(a);
                if hi < lo || *hi - *lo >= 64 || *hi >= 64 {
                    return Err(VcError::TooWide);
                }
                // Out-of-range upper bits read as zero, like the simulator.
                let arg = Term::resize(self.enc(a)?, wa.max(*hi as u8 + 1));
                Ok(Term::Extract {
                    arg: Box::new(arg),
                    hi: *hi as u8,
                    lo: *lo as u8,
                })
            }
            // Datapath and unfamiliar operators stay uninterpreted; a shift
            // by a non-constant amount lands here as well.
            _ => {
                let ws: Vec<u8> = args.iter().map(|a| self.width_of(a)).collect();
                let w = ws.iter().copied().max().unwrap_or(1);
                let enc_args: Result<Vec<Term>, VcError> = args
                    .iter()
                    .map(|a| Ok(Term::resize(self.enc(a)?, w)))
                    .collect();
                Ok(Term::App {
                    func: format!("{s}/{w}"),
                    width: w,
                    args: enc_args?,
                })
            }
        }
    }
}

/// Pending non-blocking effects: value and a written flag, merged at branch
/// joins.
type NbMap = BTreeMap<String, (Term, Term)>;

fn encode_stmt(
    enc: &mut CycleEncoder,
    s: &Statement,
    nb: &mut NbMap,
) -> Result<(), VcError> {
    match s {
        Statement::Skip | Statement::ContinuousAssign { .. } => Ok(()),
        Statement::Sequence(items) => {
            for i in items {
                encode_stmt(enc, i, nb)?;
            }
            Ok(())
        }
        Statement::BlockingAssign { lhs, rhs } => {
            let w = enc.pp.program.vars[lhs].width;
            let t = enc.enc(rhs)?;
            let v = enc.define(lhs, t, w);
            enc.cur.insert(lhs.clone(), v);
            Ok(())
        }
        Statement::NonBlockingAssign { lhs, rhs } => {
            let w = enc.pp.program.vars[lhs].width;
            let t = enc.enc(rhs)?;
            let v = enc.define(lhs, t, w);
            nb.insert(lhs.clone(), (v, Term::True));
            Ok(())
        }
        Statement::IfThenElse {
            cond,
            then_branch,
            else_branch,
        } => {
            let g = enc.enc_bool(cond)?;
            let gv = enc.define("guard", Term::bool_to_bv(g), 1);
            let g = Term::bv_to_bool(gv);

            let cur_base = enc.cur.clone();
            let nb_base = nb.clone();
            encode_stmt(enc, then_branch, nb)?;
            let cur_then = std::mem::replace(&mut enc.cur, cur_base.clone());
            let nb_then = std::mem::replace(nb, nb_base.clone());
            encode_stmt(enc, else_branch, nb)?;

            // Merge blocking state.
            let keys: BTreeSet<String> = cur_then.keys().cloned().collect();
            for k in keys {
                let t = cur_then[&k].clone();
                let e = enc.cur[&k].clone();
                if t != e {
                    let w = enc.pp.program.vars[&k].width;
                    let merged = enc.define(
                        &k,
                        Term::Ite {
                            cond: Box::new(g.clone()),
                            then: Box::new(t),
                            els: Box::new(e),
                        },
                        w,
                    );
                    enc.cur.insert(k, merged);
                }
            }
            // Merge pending non-blocking effects.
            let mut keys: BTreeSet<String> = nb_then.keys().cloned().collect();
            keys.extend(nb.keys().cloned());
            for k in keys {
                let w = enc.pp.program.vars[&k].width;
                let absent = || (Term::bv(w, 0), Term::False);
                let (tv, tw) = nb_then.get(&k).cloned().unwrap_or_else(absent);
                let (ev, ew) = nb.get(&k).cloned().unwrap_or_else(absent);
                if tv == ev && tw == ew {
                    nb.insert(k, (tv, tw));
                    continue;
                }
                let val = Term::Ite {
                    cond: Box::new(g.clone()),
                    then: Box::new(tv),
                    els: Box::new(ev),
                };
                let flag = Term::Ite {
                    cond: Box::new(g.clone()),
                    then: Box::new(tw),
                    els: Box::new(ew),
                };
                nb.insert(k, (val, flag));
            }
            Ok(())
        }
    }
}

/// The wires that start-of-cycle source injection (transitively) recomputes,
/// in evaluation order. Every wire must be in this cone, must not read
/// blocking-assigned registers, and the wire dependency graph must be
/// acyclic.
fn triggered_wire_order(pp: &ProductProgram) -> Result<Vec<(String, Expression)>, VcError> {
    let assigns = pp.program.continuous_assigns();
    let mut blocking_regs: BTreeSet<String> = BTreeSet::new();
    for p in &pp.program.processes {
        if p.kind != ProcessKind::Sequential {
            continue;
        }
        for (v, k) in p.body.assigned_vars() {
            if k == crate::ir::AssignKind::Blocking {
                blocking_regs.insert(v);
            }
        }
    }
    for (_, lhs, rhs) in &assigns {
        for v in rhs.free_vars() {
            if blocking_regs.contains(&v) {
                return Err(VcError::WireReadsBlockingTarget {
                    wire: lhs.clone(),
                    reg: v,
                });
            }
        }
    }

    let mut seeds: BTreeSet<String> = BTreeSet::new();
    for src in &pp.annots.sources {
        for rename in [left_name, right_name] {
            seeds.insert(rename(src));
            seeds.insert(rename(&pp.shadow_of[src]));
        }
    }
    let mut order: Vec<(String, Expression)> = Vec::new();
    let mut fired: BTreeSet<String> = BTreeSet::new();
    let mut remaining: Vec<(String, Expression)> = assigns
        .into_iter()
        .map(|(_, lhs, rhs)| (lhs, rhs))
        .collect();
    loop {
        let mut progressed = false;
        remaining.retain(|(lhs, rhs)| {
            let deps = rhs.free_vars();
            let triggered = deps.iter().any(|d| seeds.contains(d) || fired.contains(d));
            let wire_deps_done = deps
                .iter()
                .filter(|d| pp.program.is_wire(d))
                .all(|d| fired.contains(d));
            if triggered && wire_deps_done {
                fired.insert(lhs.clone());
                order.push((lhs.clone(), rhs.clone()));
                progressed = true;
                false
            } else {
                true
            }
        });
        if remaining.is_empty() {
            return Ok(order);
        }
        if !progressed {
            // Distinguish an untriggered wire from a dependency cycle: a
            // remaining wire none of whose wire dependencies are remaining is
            // simply never triggered.
            let names: BTreeSet<&String> = remaining.iter().map(|(l, _)| l).collect();
            for (lhs, rhs) in &remaining {
                let depends_on_remaining = rhs
                    .free_vars()
                    .iter()
                    .any(|d| names.contains(d) && d != lhs);
                if !depends_on_remaining && !rhs.free_vars().contains(lhs) {
                    return Err(VcError::UntriggeredWire { wire: lhs.clone() });
                }
            }
            return Err(VcError::CombinationalLoop {
                wires: remaining.iter().map(|(l, _)| l.clone()).collect(),
            });
        }
    }
}

/// Compiles one clock cycle of the product program into a transition
/// formula.
pub fn compile_cycle(pp: &ProductProgram) -> Result<TransitionFormula, VcError> {
    let mut state: Vec<(String, u8)> = pp
        .program
        .registers()
        .map(|v| (v.name.clone(), v.width))
        .collect();
    state.sort();
    state.push((CYCLE_VAR.to_string(), CYCLE_WIDTH));

    let mut enc = CycleEncoder {
        pp,
        defs: Vec::new(),
        cur: BTreeMap::new(),
        fresh: 0,
    };
    for (name, w) in &state {
        if name != CYCLE_VAR {
            enc.cur.insert(name.clone(), pre_sym(name, *w));
        }
    }

    // Start-of-cycle wire cascade.
    for (wire, rhs) in triggered_wire_order(pp)? {
        let w = pp.program.vars[&wire].width;
        let t = enc.enc(&rhs)?;
        let v = enc.define(&wire, t, w);
        enc.cur.insert(wire, v);
    }

    // Sequential processes in canonical order.
    let mut nb: NbMap = BTreeMap::new();
    let mut procs: Vec<_> = pp
        .program
        .processes
        .iter()
        .filter(|p| p.kind == ProcessKind::Sequential)
        .collect();
    procs.sort_by_key(|p| p.id);
    for p in procs {
        encode_stmt(&mut enc, &p.body, &mut nb)?;
    }

    // Commit: deferred assignments land, then the environment drives the
    // next boundary.
    let sources_renamed: BTreeSet<String> = pp
        .annots
        .sources
        .iter()
        .flat_map(|s| [left_name(s), right_name(s)])
        .collect();
    let shadow_sources: BTreeSet<String> = pp
        .annots
        .sources
        .iter()
        .flat_map(|s| {
            let sh = &pp.shadow_of[s];
            [left_name(sh), right_name(sh)]
        })
        .collect();

    let cycle_post = post_sym(CYCLE_VAR, CYCLE_WIDTH);
    enc.defs.push(Term::eq(
        cycle_post.clone(),
        Term::Add(
            Box::new(pre_sym(CYCLE_VAR, CYCLE_WIDTH)),
            Box::new(Term::bv(CYCLE_WIDTH, 1)),
        ),
    ));
    let issue_live = Term::bool_to_bv(Term::eq(
        cycle_post,
        Term::var(ISSUE_VAR, CYCLE_WIDTH),
    ));

    for (name, w) in &state {
        if name == CYCLE_VAR {
            continue;
        }
        if sources_renamed.contains(name) {
            // Havoc: the injected source value is unconstrained.
            continue;
        }
        let post = post_sym(name, *w);
        if shadow_sources.contains(name) {
            enc.defs.push(Term::eq(post, issue_live.clone()));
            continue;
        }
        let base = enc.cur[name].clone();
        let value = match nb.remove(name) {
            None => base,
            Some((val, Term::True)) => val,
            Some((val, flag)) => Term::Ite {
                cond: Box::new(flag),
                then: Box::new(val),
                els: Box::new(base),
            },
        };
        enc.defs.push(Term::eq(post, Term::resize(value, *w)));
    }

    Ok(TransitionFormula {
        state,
        constraint: Term::and(enc.defs),
    })
}

/// Horn clauses over one unknown relational invariant:
/// `Init => Inv(s0)`, `Inv(s) /\ Next(s,s') /\ Channel(s') => Inv(s')`, and
/// `Inv(s) => Assert(s)`.
#[derive(Debug, Clone)]
pub struct HornSystem {
    pub state: Vec<(String, u8)>,
    pub init: Term,
    pub transition: TransitionFormula,
    pub channel_pre: Term,
    pub channel_post: Term,
    /// Per sink: equal left/right shadow at every boundary.
    pub asserts: Vec<(String, Term)>,
}

fn formula_term(
    pp: &ProductProgram,
    f: &Formula,
    at: &dyn Fn(&str, u8) -> Term,
) -> Result<Term, VcError> {
    let mut parts = Vec::new();
    let sided = |x: &str, side: Side| -> Vec<String> {
        match side {
            Side::Left => vec![left_name(x)],
            Side::Right => vec![right_name(x)],
            Side::Both => vec![left_name(x), right_name(x)],
        }
    };
    let width = |pp: &ProductProgram, x: &str| -> Result<u8, VcError> {
        let l = left_name(x);
        match pp.program.vars.get(&l) {
            Some(v) if v.class == crate::ir::StorageClass::Register => Ok(v.width),
            _ => Err(VcError::FormulaOnWire { var: x.to_string() }),
        }
    };
    for atom in &f.atoms {
        match atom {
            FormulaAtom::EqLR(x) => {
                let w = width(pp, x)?;
                parts.push(Term::eq(at(&left_name(x), w), at(&right_name(x), w)));
            }
            FormulaAtom::EqConst(side, x, c) => {
                let w = width(pp, x)?;
                for name in sided(x, *side) {
                    parts.push(Term::eq(at(&name, w), Term::bv(w, *c)));
                }
            }
            FormulaAtom::EqVars(side, x, y) => {
                let wx = width(pp, x)?;
                let wy = width(pp, y)?;
                let (sx, sy) = (sided(x, *side), sided(y, *side));
                for (nx, ny) in sx.iter().zip(&sy) {
                    parts.push(Term::eq(at(nx, wx), at(ny, wy)));
                }
            }
        }
    }
    Ok(Term::and(parts))
}

/// Builds the Horn system for a product program.
pub fn generate_horn(pp: &ProductProgram) -> Result<HornSystem, VcError> {
    let transition = compile_cycle(pp)?;
    let annots = &pp.annots;

    let channel_of = |at: &dyn Fn(&str, u8) -> Term| -> Result<Term, VcError> {
        let mut parts = Vec::new();
        for f in &annots.always_eq {
            parts.push(formula_term(pp, f, at)?);
        }
        Ok(Term::and(parts))
    };
    let channel_pre = channel_of(&|n, w| pre_sym(n, w))?;
    let channel_post = channel_of(&|n, w| post_sym(n, w))?;

    let mut init_parts = vec![Term::eq(
        pre_sym(CYCLE_VAR, CYCLE_WIDTH),
        Term::bv(CYCLE_WIDTH, 0),
    )];
    // Shadows start dead; source shadows carry the issue comparison for
    // cycle 0.
    let issue0 = Term::bool_to_bv(Term::eq(
        Term::bv(CYCLE_WIDTH, 0),
        Term::var(ISSUE_VAR, CYCLE_WIDTH),
    ));
    for (orig, sh) in &pp.shadow_of {
        for rename in [left_name, right_name] {
            let name = rename(sh);
            if !pp.program.is_register(&name) {
                continue;
            }
            let value = if annots.sources.contains(orig) {
                issue0.clone()
            } else {
                Term::bv(1, 0)
            };
            init_parts.push(Term::eq(pre_sym(&name, 1), value));
        }
    }
    for f in &annots.initial_eq {
        init_parts.push(formula_term(pp, f, &|n, w| pre_sym(n, w))?);
    }
    init_parts.push(channel_pre.clone());

    let mut asserts = Vec::new();
    for (sink, l, r) in pp.sink_assertions() {
        asserts.push((sink, Term::eq(pre_sym(&l, 1), pre_sym(&r, 1))));
    }

    Ok(HornSystem {
        state: transition.state.clone(),
        init: Term::and(init_parts),
        transition,
        channel_pre,
        channel_post,
        asserts,
    })
}

/// Candidate invariant conjuncts, instantiated over `.pre` or `.post`
/// state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredShape {
    VarEqVar(String, String),
    VarEqConst(String, u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicate {
    pub label: String,
    pub shape: PredShape,
}

impl Predicate {
    fn instantiate(&self, widths: &BTreeMap<String, u8>, at: &dyn Fn(&str, u8) -> Term) -> Term {
        match &self.shape {
            PredShape::VarEqVar(a, b) => {
                let (wa, wb) = (widths[a], widths[b]);
                Term::eq(at(a, wa), at(b, wb))
            }
            PredShape::VarEqConst(a, c) => {
                let w = widths[a];
                Term::eq(at(a, w), Term::bv(w, *c))
            }
        }
    }
}

/// A user hint: the liveness bits of two variables track each other within
/// each run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hint {
    pub a: String,
    pub b: String,
}

/// The base predicate universe: per original register, value equality across
/// runs, shadow equality across runs, and dead shadows per side; plus the
/// per-run shadow equalities from user hints.
pub fn predicate_universe(pp: &ProductProgram, hints: &[Hint]) -> Vec<Predicate> {
    let mut out = Vec::new();
    let mut originals: Vec<&String> = pp.shadow_of.keys().collect();
    originals.sort();
    for x in originals {
        if !pp.program.is_register(&left_name(x)) {
            continue;
        }
        let sh = &pp.shadow_of[x];
        out.push(Predicate {
            label: format!("{x}$L = {x}$R"),
            shape: PredShape::VarEqVar(left_name(x), right_name(x)),
        });
        out.push(Predicate {
            label: format!("live${x}$L = live${x}$R"),
            shape: PredShape::VarEqVar(left_name(sh), right_name(sh)),
        });
        out.push(Predicate {
            label: format!("live${x}$L = 0"),
            shape: PredShape::VarEqConst(left_name(sh), 0),
        });
        out.push(Predicate {
            label: format!("live${x}$R = 0"),
            shape: PredShape::VarEqConst(right_name(sh), 0),
        });
    }
    for h in hints {
        let (sa, sb) = (
            pp.shadow_of.get(&h.a).cloned().unwrap_or_else(|| crate::xform::shadow_name(&h.a)),
            pp.shadow_of.get(&h.b).cloned().unwrap_or_else(|| crate::xform::shadow_name(&h.b)),
        );
        for (side, rename) in [("L", left_name as fn(&str) -> String), ("R", right_name)] {
            out.push(Predicate {
                label: format!("live${}${side} = live${}${side}", h.a, h.b),
                shape: PredShape::VarEqVar(rename(&sa), rename(&sb)),
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerifierResult {
    Verified,
    CannotProve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifierVerdict {
    pub result: VerifierResult,
    /// Surviving conjuncts when verified; the residual invariant otherwise.
    pub invariant: Vec<String>,
    pub dropped: Vec<String>,
    /// The clause that could not be discharged, when not verified.
    pub failing_clause: Option<String>,
    /// Bounded counterexample, when a refutation search ran and found one.
    pub counterexample: Option<Witness>,
}

/// Conjunctive invariant inference: filter the universe against the initial
/// states, then drop non-inductive conjuncts to a fixpoint, then check the
/// sink assertions under the surviving conjunction.
pub fn houdini_solve(
    hs: &HornSystem,
    universe: &[Predicate],
    backend: &SolverBackend,
) -> Result<VerifierVerdict, SolverUnavailable> {
    let widths: BTreeMap<String, u8> = hs.state.iter().cloned().collect();
    let pre = |n: &str, w: u8| pre_sym(n, w);
    let post = |n: &str, w: u8| post_sym(n, w);

    let mut dropped: Vec<String> = Vec::new();
    let mut surviving: Vec<&Predicate> = Vec::new();
    for p in universe {
        let ok = backend.check_implication(&hs.init, &p.instantiate(&widths, &pre))?;
        if ok == CheckOutcome::Valid {
            surviving.push(p);
        } else {
            dropped.push(p.label.clone());
        }
    }

    loop {
        let inv_pre = Term::and(
            surviving
                .iter()
                .map(|p| p.instantiate(&widths, &pre))
                .collect(),
        );
        // Every state the invariant describes was reached through
        // channel-satisfying boundaries, so the pre-state channel is sound
        // to assume here; sources need it, since their injected values are
        // only pinned by the post-state conjunct of the previous step.
        let body = Term::and(vec![
            inv_pre.clone(),
            hs.channel_pre.clone(),
            hs.transition.constraint.clone(),
            hs.channel_post.clone(),
        ]);
        let mut keep = Vec::new();
        let mut fell = Vec::new();
        for p in &surviving {
            let ok = backend.check_implication(&body, &p.instantiate(&widths, &post))?;
            if ok == CheckOutcome::Valid {
                keep.push(*p);
            } else {
                fell.push(p.label.clone());
            }
        }
        let done = fell.is_empty();
        dropped.extend(fell);
        surviving = keep;
        if done {
            break;
        }
    }

    let inv_pre = Term::and(
        surviving
            .iter()
            .map(|p| p.instantiate(&widths, &pre))
            .collect(),
    );
    let antecedent = Term::and(vec![inv_pre, hs.channel_pre.clone()]);
    let mut failing_clause = None;
    for (sink, a) in &hs.asserts {
        let ok = backend.check_implication(&antecedent, a)?;
        if ok != CheckOutcome::Valid {
            failing_clause = Some(format!("Inv(s) => live${sink}$L = live${sink}$R"));
            break;
        }
    }

    Ok(VerifierVerdict {
        result: if failing_clause.is_none() {
            VerifierResult::Verified
        } else {
            VerifierResult::CannotProve
        },
        invariant: surviving.iter().map(|p| p.label.clone()).collect(),
        dropped,
        failing_clause,
        counterexample: None,
    })
}

/// Bounded refutation: exhaustive paired-schedule search on the original
/// program for a sink liveness divergence up to `depth` cycles. By monitor
/// faithfulness this is exactly a sink shadow divergence of the product.
pub fn bmc_refute(
    program: &crate::ir::Program,
    annots: &AnnotationSet,
    depth: u32,
    width: u8,
) -> Result<Option<Witness>, oracle::OracleError> {
    if depth == 0 {
        return Ok(None);
    }
    let cfg = OracleConfig {
        width,
        n_cycles: depth,
        issue_cycles: None,
        ..OracleConfig::default()
    };
    let verdict = oracle::brute_force_liveq(program, annots, &cfg)?;
    Ok(verdict.witness)
}

/// Validity of `antecedent => consequent` with the built-in or external
/// decision procedure.
pub fn check_implication(
    antecedent: &Term,
    consequent: &Term,
    backend: &SolverBackend,
) -> Result<CheckOutcome, SolverUnavailable> {
    backend.check_implication(antecedent, consequent)
}

#[cfg(test)]
mod tests;
