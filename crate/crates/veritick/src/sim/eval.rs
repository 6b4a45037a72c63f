//! Expression evaluation: values, liveness bits, and influence sets.
//!
//! A variable evaluates to its store entry together with its liveness bit and
//! influence set. A constant is dead and influenced by nothing. A function
//! application joins the liveness bits (or) and influence sets (union) of its
//! arguments; its value is computed by the built-in operator table, and is
//! `Unknown` if any argument is `Unknown` or the symbol has no built-in
//! meaning.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ir::{sym, Expression};

pub type CycleSet = BTreeSet<u32>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Value {
    Bits { width: u8, val: u64 },
    Unknown,
}

impl Value {
    pub fn bits(width: u8, val: u64) -> Value {
        Value::Bits {
            width,
            val: mask(width, val),
        }
    }

    pub fn bool(b: bool) -> Value {
        Value::bits(1, b as u64)
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Value::Unknown)
    }

    /// Truthiness for guards; `None` when the value is unknown.
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bits { val, .. } => Some(*val != 0),
            Value::Unknown => None,
        }
    }

    pub fn truncate(&self, width: u8) -> Value {
        match self {
            Value::Bits { val, .. } => Value::bits(width, *val),
            Value::Unknown => Value::Unknown,
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Bits { val, .. } => write!(f, "{val}"),
            Value::Unknown => write!(f, "?"),
        }
    }
}

pub fn mask(width: u8, val: u64) -> u64 {
    if width >= 64 {
        val
    } else {
        val & ((1u64 << width) - 1)
    }
}

/// Result of evaluating one expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaled {
    pub value: Value,
    pub live: bool,
    pub influence: CycleSet,
}

/// Evaluates `e` against the given store, liveness map, and influence map.
/// Every free variable of `e` must be present in the store.
pub fn eval_expr(
    e: &Expression,
    store: &BTreeMap<String, Value>,
    live: &BTreeMap<String, bool>,
    infl: &BTreeMap<String, CycleSet>,
) -> Evaled {
    match e {
        Expression::VarRef(v) => Evaled {
            value: store
                .get(v)
                .cloned()
                .unwrap_or_else(|| panic!("undeclared variable `{v}` in expression")),
            live: live.get(v).copied().unwrap_or(false),
            influence: infl.get(v).cloned().unwrap_or_default(),
        },
        Expression::ConstInt(n) => Evaled {
            value: Value::Bits {
                width: 64,
                val: *n,
            },
            live: false,
            influence: CycleSet::new(),
        },
        Expression::FunApp(symbol, args) => {
            let evaled: Vec<Evaled> = args
                .iter()
                .map(|a| eval_expr(a, store, live, infl))
                .collect();
            let live = evaled.iter().any(|r| r.live);
            let mut influence = CycleSet::new();
            for r in &evaled {
                influence.extend(r.influence.iter().copied());
            }
            let value = apply_symbol(symbol, &evaled);
            Evaled {
                value,
                live,
                influence,
            }
        }
    }
}

/// Concrete semantics for the built-in operator set. Any application with an
/// `Unknown` argument evaluates to `Unknown`, as does any symbol the table
/// does not know (the expression layer carries those abstractly).
pub fn apply_symbol(symbol: &str, args: &[Evaled]) -> Value {
    if args.iter().any(|a| a.value.is_unknown()) {
        return Value::Unknown;
    }
    let raw: Vec<(u8, u64)> = args
        .iter()
        .map(|a| match &a.value {
            Value::Bits { width, val } => (*width, *val),
            Value::Unknown => unreachable!(),
        })
        .collect();
    match (symbol, raw.as_slice()) {
        (sym::EQ, [(_, a), (_, b)]) => Value::bool(a == b),
        (sym::NE, [(_, a), (_, b)]) => Value::bool(a != b),
        (sym::LT, [(_, a), (_, b)]) => Value::bool(a < b),
        (sym::LE, [(_, a), (_, b)]) => Value::bool(a <= b),
        (sym::GT, [(_, a), (_, b)]) => Value::bool(a > b),
        (sym::GE, [(_, a), (_, b)]) => Value::bool(a >= b),
        (sym::ADD, [(wa, a), (wb, b)]) => Value::bits((*wa).max(*wb), a.wrapping_add(*b)),
        (sym::SUB, [(wa, a), (wb, b)]) => Value::bits((*wa).max(*wb), a.wrapping_sub(*b)),
        (sym::MUL, [(wa, a), (wb, b)]) => Value::bits((*wa).max(*wb), a.wrapping_mul(*b)),
        (sym::BIT_AND, [(wa, a), (wb, b)]) => Value::bits((*wa).max(*wb), a & b),
        (sym::BIT_OR, [(wa, a), (wb, b)]) => Value::bits((*wa).max(*wb), a | b),
        (sym::BIT_XOR, [(wa, a), (wb, b)]) => Value::bits((*wa).max(*wb), a ^ b),
        (sym::BIT_NOT, [(wa, a)]) => Value::bits(*wa, !a),
        (sym::LOG_AND, [(_, a), (_, b)]) => Value::bool(*a != 0 && *b != 0),
        (sym::LOG_OR, [(_, a), (_, b)]) => Value::bool(*a != 0 || *b != 0),
        (sym::LOG_NOT, [(_, a)]) => Value::bool(*a == 0),
        (sym::SHL, [(wa, a), (_, b)]) => {
            Value::bits(*wa, if *b >= 64 { 0 } else { a << b })
        }
        (sym::SHR, [(wa, a), (_, b)]) => {
            Value::bits(*wa, if *b >= 64 { 0 } else { a >> b })
        }
        (sym::MUX, [(_, c), _, _]) => {
            let (wt, t) = raw[1];
            let (wf, f) = raw[2];
            Value::bits(wt.max(wf), if *c != 0 { t } else { f })
        }
        (sym::CONCAT, parts) if !parts.is_empty() => {
            let total: u32 = parts.iter().map(|(w, _)| *w as u32).sum();
            if total > 64 {
                return Value::Unknown;
            }
            let mut acc = 0u64;
            for (w, v) in parts {
                acc = (acc << w) | v;
            }
            Value::bits(total as u8, acc)
        }
        (sym::SELECT, [(wa, a), (_, i)]) => {
            if *i >= *wa as u64 {
                Value::bool(false)
            } else {
                Value::bool((a >> i) & 1 == 1)
            }
        }
        (sym::PART, [(_, a), (_, hi), (_, lo)]) => {
            if hi < lo || hi - lo >= 64 {
                Value::Unknown
            } else {
                let w = (hi - lo + 1) as u8;
                Value::bits(w, a >> lo)
            }
        }
        _ => Value::Unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::Expression as E;

    fn env() -> (
        BTreeMap<String, Value>,
        BTreeMap<String, bool>,
        BTreeMap<String, CycleSet>,
    ) {
        let mut store = BTreeMap::new();
        let mut live = BTreeMap::new();
        let mut infl = BTreeMap::new();
        store.insert("x".into(), Value::bits(1, 0));
        live.insert("x".into(), true);
        infl.insert("x".into(), CycleSet::from([3]));
        store.insert("y".into(), Value::bits(1, 1));
        live.insert("y".into(), false);
        infl.insert("y".into(), CycleSet::from([5]));
        (store, live, infl)
    }

    #[test]
    fn constants_are_dead() {
        let (s, l, i) = env();
        let r = eval_expr(&E::int(7), &s, &l, &i);
        assert_eq!(r.value, Value::Bits { width: 64, val: 7 });
        assert!(!r.live);
        assert!(r.influence.is_empty());
    }

    #[test]
    fn function_joins_liveness_and_influence() {
        let (s, l, i) = env();
        // (x == 0) || (y == 0)
        let e = E::app(
            sym::LOG_OR,
            vec![
                E::app(sym::EQ, vec![E::var("x"), E::int(0)]),
                E::app(sym::EQ, vec![E::var("y"), E::int(0)]),
            ],
        );
        let r = eval_expr(&e, &s, &l, &i);
        assert_eq!(r.value, Value::bool(true));
        assert!(r.live);
        assert_eq!(r.influence, CycleSet::from([3, 5]));
    }

    #[test]
    fn unknown_absorbs_values_but_not_taint() {
        let (mut s, l, i) = env();
        s.insert("x".into(), Value::Unknown);
        let e = E::app(sym::ADD, vec![E::var("x"), E::int(3)]);
        let r = eval_expr(&e, &s, &l, &i);
        assert!(r.value.is_unknown());
        assert!(r.live);
        assert_eq!(r.influence, CycleSet::from([3]));
    }

    #[test]
    fn unknown_symbols_yield_unknown_values() {
        let (s, l, i) = env();
        let e = E::app("montgomery_mul", vec![E::var("x"), E::var("y")]);
        let r = eval_expr(&e, &s, &l, &i);
        assert!(r.value.is_unknown());
        assert_eq!(r.influence, CycleSet::from([3, 5]));
    }

    #[test]
    fn concat_and_selects() {
        let (s, l, i) = env();
        let e = E::app(sym::CONCAT, vec![E::var("y"), E::var("x")]);
        let r = eval_expr(&e, &s, &l, &i);
        assert_eq!(r.value, Value::bits(2, 0b10));
        let e = E::app(sym::SELECT, vec![e.clone(), E::int(1)]);
        assert_eq!(eval_expr(&e, &s, &l, &i).value, Value::bool(true));
    }
}
