//! Deterministic SMT-LIB v2 emission.
//!
//! Two flavours: a quantifier-free script for one implication query, and the
//! constrained-Horn rendering of a whole system, with one declared invariant
//! relation and the clauses as universally quantified implications. Identical
//! inputs produce byte-identical text.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::term::Term;
use super::{HornSystem, CYCLE_WIDTH, ISSUE_VAR};

fn sort_str(width: u8) -> String {
    format!("(_ BitVec {width})")
}

/// SMT-LIB symbols: keep simple names as-is, quote the rest.
fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && name.chars().all(|c| {
            c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c)
        })
        && !name.chars().next().unwrap().is_ascii_digit();
    if simple {
        name.to_string()
    } else {
        format!("|{}|", name.replace('|', "_"))
    }
}

/// Uninterpreted functions occurring in a term: mangled name -> (arg widths,
/// result width).
fn collect_ufs(t: &Term, out: &mut BTreeMap<String, (Vec<u8>, u8)>) {
    match t {
        Term::App { func, width, args } => {
            let arg_widths: Vec<u8> = args
                .iter()
                .map(|a| a.sort().bv_width().expect("bv args"))
                .collect();
            out.insert(func.clone(), (arg_widths, *width));
            for a in args {
                collect_ufs(a, out);
            }
        }
        Term::Bv { .. } | Term::Var { .. } | Term::True | Term::False => {}
        Term::Concat(items) | Term::And(items) | Term::Or(items) => {
            for i in items {
                collect_ufs(i, out);
            }
        }
        Term::BvAnd(a, b)
        | Term::BvOr(a, b)
        | Term::BvXor(a, b)
        | Term::Add(a, b)
        | Term::Eq(a, b)
        | Term::Ult(a, b)
        | Term::Ule(a, b)
        | Term::Implies(a, b) => {
            collect_ufs(a, out);
            collect_ufs(b, out);
        }
        Term::BvNot(a)
        | Term::Not(a)
        | Term::ZExt { arg: a, .. }
        | Term::Trunc { arg: a, .. }
        | Term::Extract { arg: a, .. }
        | Term::ShlConst { arg: a, .. }
        | Term::ShrConst { arg: a, .. } => collect_ufs(a, out),
        Term::Ite { cond, then, els } => {
            collect_ufs(cond, out);
            collect_ufs(then, out);
            collect_ufs(els, out);
        }
    }
}

pub fn term_to_sexp(t: &Term) -> String {
    match t {
        Term::Bv { width, val } => format!("(_ bv{val} {width})"),
        Term::Var { name, .. } => symbol(name),
        Term::App { func, args, .. } => {
            let mut s = format!("({}", symbol(func));
            for a in args {
                s.push(' ');
                s.push_str(&term_to_sexp(a));
            }
            s.push(')');
            s
        }
        Term::BvAnd(a, b) => format!("(bvand {} {})", term_to_sexp(a), term_to_sexp(b)),
        Term::BvOr(a, b) => format!("(bvor {} {})", term_to_sexp(a), term_to_sexp(b)),
        Term::BvXor(a, b) => format!("(bvxor {} {})", term_to_sexp(a), term_to_sexp(b)),
        Term::BvNot(a) => format!("(bvnot {})", term_to_sexp(a)),
        Term::Add(a, b) => format!("(bvadd {} {})", term_to_sexp(a), term_to_sexp(b)),
        Term::ZExt { arg, width } => {
            let aw = arg.sort().bv_width().unwrap();
            format!("((_ zero_extend {}) {})", width - aw, term_to_sexp(arg))
        }
        Term::Trunc { arg, width } => {
            format!("((_ extract {} 0) {})", width - 1, term_to_sexp(arg))
        }
        Term::Concat(parts) => {
            let mut s = String::from("(concat");
            for p in parts {
                s.push(' ');
                s.push_str(&term_to_sexp(p));
            }
            s.push(')');
            s
        }
        Term::Extract { arg, hi, lo } => {
            format!("((_ extract {hi} {lo}) {})", term_to_sexp(arg))
        }
        Term::ShlConst { arg, by } => {
            let w = arg.sort().bv_width().unwrap();
            format!("(bvshl {} (_ bv{by} {w}))", term_to_sexp(arg))
        }
        Term::ShrConst { arg, by } => {
            let w = arg.sort().bv_width().unwrap();
            format!("(bvlshr {} (_ bv{by} {w}))", term_to_sexp(arg))
        }
        Term::Ite { cond, then, els } => format!(
            "(ite {} {} {})",
            term_to_sexp(cond),
            term_to_sexp(then),
            term_to_sexp(els)
        ),
        Term::True => "true".into(),
        Term::False => "false".into(),
        Term::Eq(a, b) => {
            if a.sort() == b.sort() {
                format!("(= {} {})", term_to_sexp(a), term_to_sexp(b))
            } else {
                // Mixed widths zero-extend to the wider side.
                let wa = a.sort().bv_width().unwrap();
                let wb = b.sort().bv_width().unwrap();
                let w = wa.max(wb);
                format!(
                    "(= {} {})",
                    term_to_sexp(&Term::resize((**a).clone(), w)),
                    term_to_sexp(&Term::resize((**b).clone(), w))
                )
            }
        }
        Term::Ult(a, b) => cmp_sexp("bvult", a, b),
        Term::Ule(a, b) => cmp_sexp("bvule", a, b),
        Term::Not(a) => format!("(not {})", term_to_sexp(a)),
        Term::And(items) => nary("and", items),
        Term::Or(items) => nary("or", items),
        Term::Implies(a, b) => format!("(=> {} {})", term_to_sexp(a), term_to_sexp(b)),
    }
}

fn cmp_sexp(op: &str, a: &Term, b: &Term) -> String {
    let wa = a.sort().bv_width().unwrap();
    let wb = b.sort().bv_width().unwrap();
    let w = wa.max(wb);
    format!(
        "({op} {} {})",
        term_to_sexp(&Term::resize(a.clone(), w)),
        term_to_sexp(&Term::resize(b.clone(), w))
    )
}

fn nary(op: &str, items: &[Term]) -> String {
    match items.len() {
        0 => {
            if op == "and" {
                "true".into()
            } else {
                "false".into()
            }
        }
        1 => term_to_sexp(&items[0]),
        _ => {
            let mut s = format!("({op}");
            for i in items {
                s.push(' ');
                s.push_str(&term_to_sexp(i));
            }
            s.push(')');
            s
        }
    }
}

fn declarations(terms: &[&Term]) -> String {
    let mut vars = BTreeMap::new();
    let mut ufs = BTreeMap::new();
    for t in terms {
        t.free_vars(&mut vars);
        collect_ufs(t, &mut ufs);
    }
    let mut out = String::new();
    for (name, (args, width)) in &ufs {
        let args = args
            .iter()
            .map(|w| sort_str(*w))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            out,
            "(declare-fun {} ({args}) {})",
            symbol(name),
            sort_str(*width)
        );
    }
    for (name, width) in &vars {
        let _ = writeln!(out, "(declare-const {} {})", symbol(name), sort_str(*width));
    }
    out
}

/// A quantifier-free satisfiability query for one formula.
pub fn qf_script(formula: &Term) -> String {
    let mut out = String::new();
    out.push_str("(set-logic QF_UFBV)\n");
    out.push_str(&declarations(&[formula]));
    let _ = writeln!(out, "(assert {})", term_to_sexp(formula));
    out.push_str("(check-sat)\n");
    out
}

/// The Horn system in the constrained-Horn fragment: one invariant relation
/// whose arity is the doubled register state plus the cycle counter and the
/// issue time, and one universally quantified implication per clause.
pub fn emit_smtlib(hs: &HornSystem) -> String {
    let mut out = String::new();
    out.push_str("(set-logic HORN)\n");

    let rel_sorts: Vec<String> = hs
        .state
        .iter()
        .map(|(_, w)| sort_str(*w))
        .chain([sort_str(CYCLE_WIDTH)])
        .collect();
    let _ = writeln!(out, "(declare-fun inv ({}) Bool)", rel_sorts.join(" "));

    let mut ufs = BTreeMap::new();
    collect_ufs(&hs.init, &mut ufs);
    collect_ufs(&hs.transition.constraint, &mut ufs);
    collect_ufs(&hs.channel_pre, &mut ufs);
    collect_ufs(&hs.channel_post, &mut ufs);
    for (name, (args, width)) in &ufs {
        let args = args
            .iter()
            .map(|w| sort_str(*w))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            out,
            "(declare-fun {} ({args}) {})",
            symbol(name),
            sort_str(*width)
        );
    }

    let inv_app = |suffix: &str| -> String {
        let mut s = String::from("(inv");
        for (name, _) in &hs.state {
            s.push(' ');
            s.push_str(&symbol(&format!("{name}.{suffix}")));
        }
        s.push(' ');
        s.push_str(&symbol(ISSUE_VAR));
        s.push(')');
        s
    };
    let state_binders = |vars: &mut BTreeMap<String, u8>, suffixes: &[&str]| {
        for (name, w) in &hs.state {
            for suffix in suffixes {
                vars.insert(format!("{name}.{suffix}"), *w);
            }
        }
        vars.insert(ISSUE_VAR.to_string(), CYCLE_WIDTH);
    };
    let forall = |vars: &BTreeMap<String, u8>, body: String, head: String| -> String {
        let binders = vars
            .iter()
            .map(|(n, w)| format!("({} {})", symbol(n), sort_str(*w)))
            .collect::<Vec<_>>()
            .join(" ");
        format!("(assert (forall ({binders}) (=> {body} {head})))\n")
    };

    // Init => Inv(s0).
    let mut vars = BTreeMap::new();
    hs.init.free_vars(&mut vars);
    state_binders(&mut vars, &["pre"]);
    out.push_str(&forall(&vars, term_to_sexp(&hs.init), inv_app("pre")));

    // Inv(s) /\ Next(s, s') /\ Channel(s') => Inv(s').
    let mut vars = BTreeMap::new();
    hs.transition.constraint.free_vars(&mut vars);
    hs.channel_pre.free_vars(&mut vars);
    hs.channel_post.free_vars(&mut vars);
    state_binders(&mut vars, &["pre", "post"]);
    let body = format!(
        "(and {} {} {} {})",
        inv_app("pre"),
        term_to_sexp(&hs.channel_pre),
        term_to_sexp(&hs.transition.constraint),
        term_to_sexp(&hs.channel_post)
    );
    out.push_str(&forall(&vars, body, inv_app("post")));

    // Inv(s) /\ Channel(s) => Assert(s).
    for (_, a) in &hs.asserts {
        let mut vars = BTreeMap::new();
        hs.channel_pre.free_vars(&mut vars);
        a.free_vars(&mut vars);
        state_binders(&mut vars, &["pre"]);
        let body = format!(
            "(and {} {})",
            inv_app("pre"),
            term_to_sexp(&hs.channel_pre)
        );
        out.push_str(&forall(&vars, body, term_to_sexp(a)));
    }
    out.push_str("(check-sat)\n");
    out
}

