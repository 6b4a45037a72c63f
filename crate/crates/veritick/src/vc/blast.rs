//! Eager bit-blasting of terms to CNF.
//!
//! Boolean structure goes through Tseitin encoding, bitvector operators are
//! expanded at their declared widths, and uninterpreted applications get
//! fresh output bits tied together by pairwise congruence (Ackermann)
//! constraints. Identical subterms share their encoding.

use std::collections::HashMap;

use super::sat::{lit, solve, Lit, SatResult};
use super::term::Term;

pub struct Blaster {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    /// Constant literals, allocated on demand.
    lit_true: Option<Lit>,
    var_bits: HashMap<String, Vec<Lit>>,
    bool_cache: HashMap<Term, Lit>,
    bv_cache: HashMap<Term, Vec<Lit>>,
    /// Uninterpreted applications: (func, arg bits) -> output bits.
    apps: Vec<(String, Vec<Vec<Lit>>, Vec<Lit>)>,
}

impl Default for Blaster {
    fn default() -> Self {
        Self::new()
    }
}

impl Blaster {
    pub fn new() -> Self {
        Blaster {
            num_vars: 0,
            clauses: Vec::new(),
            lit_true: None,
            var_bits: HashMap::new(),
            bool_cache: HashMap::new(),
            bv_cache: HashMap::new(),
            apps: Vec::new(),
        }
    }

    fn fresh(&mut self) -> Lit {
        let v = self.num_vars;
        self.num_vars += 1;
        lit(v, true)
    }

    fn constant(&mut self, value: bool) -> Lit {
        let t = match self.lit_true {
            Some(t) => t,
            None => {
                let t = self.fresh();
                self.clauses.push(vec![t]);
                self.lit_true = Some(t);
                t
            }
        };
        if value {
            t
        } else {
            t ^ 1
        }
    }

    fn and2(&mut self, a: Lit, b: Lit) -> Lit {
        let o = self.fresh();
        self.clauses.push(vec![o ^ 1, a]);
        self.clauses.push(vec![o ^ 1, b]);
        self.clauses.push(vec![o, a ^ 1, b ^ 1]);
        o
    }

    fn or2(&mut self, a: Lit, b: Lit) -> Lit {
        self.and2(a ^ 1, b ^ 1) ^ 1
    }

    fn xor2(&mut self, a: Lit, b: Lit) -> Lit {
        let o = self.fresh();
        self.clauses.push(vec![o ^ 1, a, b]);
        self.clauses.push(vec![o ^ 1, a ^ 1, b ^ 1]);
        self.clauses.push(vec![o, a, b ^ 1]);
        self.clauses.push(vec![o, a ^ 1, b]);
        o
    }

    fn iff2(&mut self, a: Lit, b: Lit) -> Lit {
        self.xor2(a, b) ^ 1
    }

    fn and_many(&mut self, lits: &[Lit]) -> Lit {
        match lits.len() {
            0 => self.constant(true),
            1 => lits[0],
            _ => {
                let o = self.fresh();
                for &l in lits {
                    self.clauses.push(vec![o ^ 1, l]);
                }
                let mut long: Vec<Lit> = lits.iter().map(|l| l ^ 1).collect();
                long.push(o);
                self.clauses.push(long);
                o
            }
        }
    }

    fn or_many(&mut self, lits: &[Lit]) -> Lit {
        let neg: Vec<Lit> = lits.iter().map(|l| l ^ 1).collect();
        self.and_many(&neg) ^ 1
    }

    fn mux(&mut self, c: Lit, t: Lit, f: Lit) -> Lit {
        let o = self.fresh();
        self.clauses.push(vec![c ^ 1, t ^ 1, o]);
        self.clauses.push(vec![c ^ 1, t, o ^ 1]);
        self.clauses.push(vec![c, f ^ 1, o]);
        self.clauses.push(vec![c, f, o ^ 1]);
        o
    }

    fn var_bits(&mut self, name: &str, width: u8) -> Vec<Lit> {
        if let Some(bits) = self.var_bits.get(name) {
            assert_eq!(
                bits.len(),
                width as usize,
                "variable `{name}` used at two widths"
            );
            return bits.clone();
        }
        let bits: Vec<Lit> = (0..width).map(|_| self.fresh()).collect();
        self.var_bits.insert(name.to_string(), bits.clone());
        bits
    }

    /// Little-endian bits of a bitvector term.
    pub fn blast_bv(&mut self, t: &Term) -> Vec<Lit> {
        if let Some(bits) = self.bv_cache.get(t) {
            return bits.clone();
        }
        let bits = match t {
            Term::Bv { width, val } => (0..*width)
                .map(|i| self.constant((val >> i) & 1 == 1))
                .collect(),
            Term::Var { name, width } => self.var_bits(name, *width),
            Term::App { func, args, width } => {
                let arg_bits: Vec<Vec<Lit>> = args.iter().map(|a| self.blast_bv(a)).collect();
                let out: Vec<Lit> = (0..*width).map(|_| self.fresh()).collect();
                self.apps.push((func.clone(), arg_bits, out.clone()));
                out
            }
            Term::BvAnd(a, b) => self.zip2(a, b, Blaster::and2),
            Term::BvOr(a, b) => self.zip2(a, b, Blaster::or2),
            Term::BvXor(a, b) => self.zip2(a, b, Blaster::xor2),
            Term::BvNot(a) => self.blast_bv(a).iter().map(|l| l ^ 1).collect(),
            Term::Add(a, b) => {
                let av = self.blast_bv(a);
                let bv = self.blast_bv(b);
                assert_eq!(av.len(), bv.len(), "adder operand widths differ");
                let mut carry = self.constant(false);
                let mut out = Vec::with_capacity(av.len());
                for i in 0..av.len() {
                    let axb = self.xor2(av[i], bv[i]);
                    out.push(self.xor2(axb, carry));
                    let c1 = self.and2(av[i], bv[i]);
                    let c2 = self.and2(axb, carry);
                    carry = self.or2(c1, c2);
                }
                out
            }
            Term::ZExt { arg, width } => {
                let mut bits = self.blast_bv(arg);
                let zero = self.constant(false);
                bits.resize(*width as usize, zero);
                bits
            }
            Term::Trunc { arg, width } => {
                let bits = self.blast_bv(arg);
                bits[..*width as usize].to_vec()
            }
            Term::Concat(parts) => {
                // First part is most significant.
                let mut bits = Vec::new();
                for p in parts.iter().rev() {
                    bits.extend(self.blast_bv(p));
                }
                bits
            }
            Term::Extract { arg, hi, lo } => {
                let bits = self.blast_bv(arg);
                bits[*lo as usize..=*hi as usize].to_vec()
            }
            Term::ShlConst { arg, by } => {
                let bits = self.blast_bv(arg);
                let zero = self.constant(false);
                let n = bits.len();
                let mut out = vec![zero; n];
                for i in 0..n {
                    if i >= *by as usize {
                        out[i] = bits[i - *by as usize];
                    }
                }
                out
            }
            Term::ShrConst { arg, by } => {
                let bits = self.blast_bv(arg);
                let zero = self.constant(false);
                let n = bits.len();
                let mut out = vec![zero; n];
                for i in 0..n {
                    if i + (*by as usize) < n {
                        out[i] = bits[i + *by as usize];
                    }
                }
                out
            }
            Term::Ite { cond, then, els } => {
                let c = self.blast_bool(cond);
                let tv = self.blast_bv(then);
                let fv = self.blast_bv(els);
                assert_eq!(tv.len(), fv.len(), "ite branch widths differ");
                tv.iter()
                    .zip(&fv)
                    .map(|(t, f)| self.mux(c, *t, *f))
                    .collect()
            }
            other => panic!("boolean term in bitvector position: {other:?}"),
        };
        self.bv_cache.insert(t.clone(), bits.clone());
        bits
    }

    fn zip2(&mut self, a: &Term, b: &Term, f: fn(&mut Blaster, Lit, Lit) -> Lit) -> Vec<Lit> {
        let av = self.blast_bv(a);
        let bv = self.blast_bv(b);
        assert_eq!(av.len(), bv.len(), "bitwise operand widths differ");
        av.iter().zip(&bv). map(|(x, y)| f(self, *x, *y)).collect()
    }

    fn widen2(&mut self, a: &Term, b: &Term) -> (Vec<Lit>, Vec<Lit>) {
        let mut av = self.blast_bv(a);
        let mut bv = self.blast_bv(b);
        let w = av.len().max(bv.len());
        let zero = self.constant(false);
        av.resize(w, zero);
        bv.resize(w, zero);
        (av, bv)
    }

    pub fn blast_bool(&mut self, t: &Term) -> Lit {
        if let Some(l) = self.bool_cache.get(t) {
            return *l;
        }
        let out = match t {
            Term::True => self.constant(true),
            Term::False => self.constant(false),
            Term::Not(a) => self.blast_bool(a) ^ 1,
            Term::And(items) => {
                let lits: Vec<Lit> = items.iter().map(|i| self.blast_bool(i)).collect();
                self.and_many(&lits)
            }
            Term::Or(items) => {
                let lits: Vec<Lit> = items.iter().map(|i| self.blast_bool(i)).collect();
                self.or_many(&lits)
            }
            Term::Implies(a, b) => {
                let av = self.blast_bool(a);
                let bv = self.blast_bool(b);
                self.or2(av ^ 1, bv)
            }
            Term::Eq(a, b) => {
                if a.sort() == super::term::Sort::Bool {
                    let av = self.blast_bool(a);
                    let bv = self.blast_bool(b);
                    self.iff2(av, bv)
                } else {
                    let (av, bv) = self.widen2(a, b);
                    let eqs: Vec<Lit> = av
                        .iter()
                        .zip(&bv)
                        .map(|(x, y)| self.iff2(*x, *y))
                        .collect();
                    self.and_many(&eqs)
                }
            }
            Term::Ult(a, b) => {
                let (av, bv) = self.widen2(a, b);
                self.borrow_out(&av, &bv)
            }
            Term::Ule(a, b) => {
                let (av, bv) = self.widen2(a, b);
                self.borrow_out(&bv, &av) ^ 1
            }
            Term::Ite { cond, then, els } => {
                let c = self.blast_bool(cond);
                let tv = self.blast_bool(then);
                let fv = self.blast_bool(els);
                self.mux(c, tv, fv)
            }
            other => panic!("bitvector term in boolean position: {other:?}"),
        };
        self.bool_cache.insert(t.clone(), out);
        out
    }

    /// Borrow bit of `a - b`: true iff a < b, unsigned.
    fn borrow_out(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let mut borrow = self.constant(false);
        for i in 0..a.len() {
            // borrow' = (~a & b) | ((~a | b) & borrow)
            let na = a[i] ^ 1;
            let t1 = self.and2(na, b[i]);
            let t2 = self.or2(na, b[i]);
            let t3 = self.and2(t2, borrow);
            borrow = self.or2(t1, t3);
        }
        borrow
    }

    pub fn assert_true(&mut self, t: &Term) {
        let l = self.blast_bool(t);
        self.clauses.push(vec![l]);
    }

    /// Adds pairwise congruence constraints for all uninterpreted
    /// applications of the same function symbol.
    fn add_congruence(&mut self) {
        let apps = std::mem::take(&mut self.apps);
        for i in 0..apps.len() {
            for j in (i + 1)..apps.len() {
                let (fi, argsi, outi) = &apps[i];
                let (fj, argsj, outj) = &apps[j];
                if fi != fj || argsi.len() != argsj.len() || outi.len() != outj.len() {
                    continue;
                }
                if argsi
                    .iter()
                    .zip(argsj)
                    .any(|(x, y)| x.len() != y.len())
                {
                    continue;
                }
                let mut arg_eqs = Vec::new();
                for (x, y) in argsi.iter().zip(argsj) {
                    for (bx, by) in x.iter().zip(y) {
                        arg_eqs.push(self.iff2(*bx, *by));
                    }
                }
                let all_eq = self.and_many(&arg_eqs);
                for (ox, oy) in outi.iter().zip(outj) {
                    // all_eq -> (ox <-> oy)
                    self.clauses.push(vec![all_eq ^ 1, *ox ^ 1, *oy]);
                    self.clauses.push(vec![all_eq ^ 1, *ox, *oy ^ 1]);
                }
            }
        }
    }

    pub fn check_sat(mut self) -> SatResult {
        self.add_congruence();
        solve(self.num_vars, &self.clauses)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vc::term::Term as T;

    fn is_satisfiable(formula: &T) -> bool {
        let mut b = Blaster::new();
        b.assert_true(formula);
        matches!(b.check_sat(), SatResult::Sat(_))
    }

    fn valid(antecedent: T, consequent: T) -> bool {
        !is_satisfiable(&T::and(vec![antecedent, T::not(consequent)]))
    }

    #[test]
    fn equality_is_transitive() {
        let a = T::var("a", 3);
        let b = T::var("b", 3);
        let c = T::var("c", 3);
        assert!(valid(
            T::and(vec![T::eq(a.clone(), b.clone()), T::eq(b, c.clone())]),
            T::eq(a, c),
        ));
    }

    #[test]
    fn tautology_fails_without_antecedent() {
        let x = T::var("x", 1);
        let y = T::var("y", 1);
        assert!(!valid(T::True, T::eq(x, y)));
    }

    #[test]
    fn congruence_axiom_holds() {
        // f(x) = y /\ x = z  =>  f(z) = y
        let x = T::var("x", 2);
        let y = T::var("y", 2);
        let z = T::var("z", 2);
        let fx = T::App {
            func: "f".into(),
            width: 2,
            args: vec![x.clone()],
        };
        let fz = T::App {
            func: "f".into(),
            width: 2,
            args: vec![z.clone()],
        };
        assert!(valid(
            T::and(vec![T::eq(fx, y.clone()), T::eq(x.clone(), z.clone())]),
            T::eq(fz.clone(), y.clone()),
        ));
        // ... but without x = z it is not valid.
        let fx = T::App {
            func: "f".into(),
            width: 2,
            args: vec![x],
        };
        assert!(!valid(T::eq(fx, y.clone()), T::eq(fz, y)));
    }

    #[test]
    fn arithmetic_on_bits_matches_the_interpreter() {
        use crate::sim::mask;
        for w in [1u8, 3, 5] {
            for a in 0..(1u64 << w) {
                for b in 0..(1u64 << w) {
                    let ta = T::bv(w, a);
                    let tb = T::bv(w, b);
                    let sum = T::Add(Box::new(ta.clone()), Box::new(tb.clone()));
                    assert!(
                        valid(T::True, T::eq(sum, T::bv(w, mask(w, a + b)))),
                        "{a}+{b} at width {w}"
                    );
                    let l = T::Ult(Box::new(ta.clone()), Box::new(tb.clone()));
                    let expect = if a < b { T::True } else { T::False };
                    assert!(valid(T::True, T::Eq(Box::new(T::bool_to_bv(l)), Box::new(T::bool_to_bv(expect)))));
                }
            }
        }
    }

    #[test]
    fn mixed_width_comparisons_zero_extend() {
        let a = T::var("a", 2);
        // a == 0b101 (width 3) forces the third bit, impossible for width 2.
        assert!(!is_satisfiable(&T::eq(a.clone(), T::bv(3, 5))));
        assert!(is_satisfiable(&T::eq(a, T::bv(3, 3))));
    }

    #[test]
    fn shifts_and_selects() {
        let x = T::var("x", 4);
        let shifted = T::ShlConst {
            arg: Box::new(x.clone()),
            by: 1,
        };
        // (x << 1)[1] == x[0]
        let lhs = T::Extract {
            arg: Box::new(shifted),
            hi: 1,
            lo: 1,
        };
        let rhs = T::Extract {
            arg: Box::new(x),
            hi: 0,
            lo: 0,
        };
        assert!(valid(T::True, T::eq(lhs, rhs)));
    }

    #[test]
    fn ite_selects_branches() {
        let c = T::var("c", 1);
        let ite = T::Ite {
            cond: Box::new(T::bv_to_bool(c.clone())),
            then: Box::new(T::bv(2, 2)),
            els: Box::new(T::bv(2, 1)),
        };
        assert!(valid(
            T::eq(c, T::bv(1, 1)),
            T::eq(ite, T::bv(2, 2)),
        ));
    }
}
