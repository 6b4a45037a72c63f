//! Solver-facing term language: quantifier-free booleans and fixed-width
//! bitvectors, with uninterpreted functions for the datapath operators the
//! verifier abstracts.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sort {
    Bool,
    Bv(u8),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    // Bitvector terms.
    Bv { width: u8, val: u64 },
    Var { name: String, width: u8 },
    /// Uninterpreted application; equal arguments give equal results.
    App { func: String, width: u8, args: Vec<Term> },
    BvAnd(Box<Term>, Box<Term>),
    BvOr(Box<Term>, Box<Term>),
    BvXor(Box<Term>, Box<Term>),
    BvNot(Box<Term>),
    Add(Box<Term>, Box<Term>),
    ZExt { arg: Box<Term>, width: u8 },
    Trunc { arg: Box<Term>, width: u8 },
    Concat(Vec<Term>),
    Extract { arg: Box<Term>, hi: u8, lo: u8 },
    ShlConst { arg: Box<Term>, by: u8 },
    ShrConst { arg: Box<Term>, by: u8 },
    Ite { cond: Box<Term>, then: Box<Term>, els: Box<Term> },
    // Boolean terms.
    True,
    False,
    Eq(Box<Term>, Box<Term>),
    Ult(Box<Term>, Box<Term>),
    Ule(Box<Term>, Box<Term>),
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Implies(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>, width: u8) -> Term {
        Term::Var {
            name: name.into(),
            width,
        }
    }

    pub fn bv(width: u8, val: u64) -> Term {
        Term::Bv {
            width,
            val: crate::sim::mask(width, val),
        }
    }

    pub fn bool_to_bv(b: Term) -> Term {
        match b {
            Term::True => Term::bv(1, 1),
            Term::False => Term::bv(1, 0),
            b => Term::Ite {
                cond: Box::new(b),
                then: Box::new(Term::bv(1, 1)),
                els: Box::new(Term::bv(1, 0)),
            },
        }
    }

    /// `t != 0` as a boolean.
    pub fn bv_to_bool(t: Term) -> Term {
        let w = t.sort().bv_width().expect("bv_to_bool on boolean term");
        Term::Not(Box::new(Term::Eq(Box::new(t), Box::new(Term::bv(w, 0)))))
    }

    pub fn eq(a: Term, b: Term) -> Term {
        Term::Eq(Box::new(a), Box::new(b))
    }

    pub fn and(mut terms: Vec<Term>) -> Term {
        terms.retain(|t| *t != Term::True);
        match terms.len() {
            0 => Term::True,
            1 => terms.pop().unwrap(),
            _ => Term::And(terms),
        }
    }

    pub fn or2(a: Term, b: Term) -> Term {
        Term::Or(vec![a, b])
    }

    pub fn not(t: Term) -> Term {
        Term::Not(Box::new(t))
    }

    pub fn implies(a: Term, b: Term) -> Term {
        Term::Implies(Box::new(a), Box::new(b))
    }

    /// Adjusts a bitvector term to the exact target width by zero-extension
    /// or truncation.
    pub fn resize(t: Term, width: u8) -> Term {
        let w = t.sort().bv_width().expect("resize on boolean term");
        use std::cmp::Ordering::*;
        match w.cmp(&width) {
            Equal => t,
            Less => Term::ZExt {
                arg: Box::new(t),
                width,
            },
            Greater => Term::Trunc {
                arg: Box::new(t),
                width,
            },
        }
    }

    pub fn sort(&self) -> Sort {
        match self {
            Term::Bv { width, .. }
            | Term::Var { width, .. }
            | Term::App { width, .. }
            | Term::ZExt { width, .. }
            | Term::Trunc { width, .. } => Sort::Bv(*width),
            Term::BvAnd(a, _) | Term::BvOr(a, _) | Term::BvXor(a, _) | Term::Add(a, _) => a.sort(),
            Term::BvNot(a) => a.sort(),
            Term::Concat(parts) => {
                let w: u32 = parts
                    .iter()
                    .map(|p| p.sort().bv_width().unwrap_or(0) as u32)
                    .sum();
                Sort::Bv(w.min(255) as u8)
            }
            Term::Extract { hi, lo, .. } => Sort::Bv(hi - lo + 1),
            Term::ShlConst { arg, .. } | Term::ShrConst { arg, .. } => arg.sort(),
            Term::Ite { then, .. } => then.sort(),
            Term::True
            | Term::False
            | Term::Eq(..)
            | Term::Ult(..)
            | Term::Ule(..)
            | Term::Not(..)
            | Term::And(..)
            | Term::Or(..)
            | Term::Implies(..) => Sort::Bool,
        }
    }

    /// Collects free variables as (name, width), sorted by name.
    pub fn free_vars(&self, out: &mut std::collections::BTreeMap<String, u8>) {
        match self {
            Term::Var { name, width } => {
                out.insert(name.clone(), *width);
            }
            Term::Bv { .. } | Term::True | Term::False => {}
            Term::App { args, .. } | Term::Concat(args) | Term::And(args) | Term::Or(args) => {
                for a in args {
                    a.free_vars(out);
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
                a.free_vars(out);
                b.free_vars(out);
            }
            Term::BvNot(a)
            | Term::Not(a)
            | Term::ZExt { arg: a, .. }
            | Term::Trunc { arg: a, .. }
            | Term::Extract { arg: a, .. }
            | Term::ShlConst { arg: a, .. }
            | Term::ShrConst { arg: a, .. } => a.free_vars(out),
            Term::Ite { cond, then, els } => {
                cond.free_vars(out);
                then.free_vars(out);
                els.free_vars(out);
            }
        }
    }
}

impl Sort {
    pub fn bv_width(&self) -> Option<u8> {
        match self {
            Sort::Bv(w) => Some(*w),
            Sort::Bool => None,
        }
    }
}
