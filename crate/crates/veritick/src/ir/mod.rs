//! The intermediate representation shared by every analysis in this crate.
//!
//! A [`Program`] is a set of processes composed in parallel, each implicitly
//! wrapped in an infinite per-cycle repeat. Process bodies are loop-free
//! statements over registers and wires; expressions are variables, integer
//! constants, and applications of named function symbols. The IR itself
//! assigns no meaning to function symbols — the simulator interprets the
//! Verilog operator set concretely, and the verification-condition layer
//! keeps wide datapath operators uninterpreted.

mod display;
mod parse;

pub use display::{expr_to_text, formula_to_text, program_to_text};
pub use parse::{parse_formula, parse_ir_text, IrParseError};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Function symbols the tool gives built-in structure to. Everything else is
/// carried through as an opaque named symbol.
pub mod sym {
    pub const EQ: &str = "==";
    pub const NE: &str = "!=";
    pub const LT: &str = "<";
    pub const LE: &str = "<=";
    pub const GT: &str = ">";
    pub const GE: &str = ">=";
    pub const ADD: &str = "+";
    pub const SUB: &str = "-";
    pub const MUL: &str = "*";
    pub const BIT_AND: &str = "&";
    pub const BIT_OR: &str = "|";
    pub const BIT_XOR: &str = "^";
    pub const BIT_NOT: &str = "~";
    pub const LOG_AND: &str = "&&";
    pub const LOG_OR: &str = "||";
    pub const LOG_NOT: &str = "!";
    pub const SHL: &str = "<<";
    pub const SHR: &str = ">>";
    /// Ternary `c ? a : b`, argument order (c, a, b).
    pub const MUX: &str = "mux";
    /// `{a, b, ...}` with the first argument in the most significant position.
    pub const CONCAT: &str = "concat";
    /// `x[i]` as (x, i) with a constant index.
    pub const SELECT: &str = "select";
    /// `x[hi:lo]` as (x, hi, lo) with constant bounds.
    pub const PART: &str = "part";
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expression {
    VarRef(String),
    ConstInt(u64),
    FunApp(String, Vec<Expression>),
}

impl Expression {
    pub fn var(name: impl Into<String>) -> Self {
        Expression::VarRef(name.into())
    }

    pub fn int(v: u64) -> Self {
        Expression::ConstInt(v)
    }

    pub fn app(sym: impl Into<String>, args: Vec<Expression>) -> Self {
        Expression::FunApp(sym.into(), args)
    }

    /// The set of variable names occurring syntactically in the expression.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut out);
        out
    }

    fn collect_free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expression::VarRef(v) => {
                out.insert(v.clone());
            }
            Expression::ConstInt(_) => {}
            Expression::FunApp(_, args) => {
                for a in args {
                    a.collect_free_vars(out);
                }
            }
        }
    }

    /// Rewrites every variable reference through `f`.
    pub fn rename_vars(&self, f: &impl Fn(&str) -> String) -> Expression {
        match self {
            Expression::VarRef(v) => Expression::VarRef(f(v)),
            Expression::ConstInt(n) => Expression::ConstInt(*n),
            Expression::FunApp(s, args) => {
                Expression::FunApp(s.clone(), args.iter().map(|a| a.rename_vars(f)).collect())
            }
        }
    }
}

/// Convenience alias for [`Expression::free_vars`], matching the name used
/// throughout the semantics.
pub fn free_vars(e: &Expression) -> BTreeSet<String> {
    e.free_vars()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statement {
    Skip,
    /// `x = e` — takes effect immediately within the cycle.
    BlockingAssign { lhs: String, rhs: Expression },
    /// `x <= e` — deferred to the end of the cycle through the process buffer.
    NonBlockingAssign { lhs: String, rhs: Expression },
    /// `assign w := e` — re-evaluated whenever a right-hand-side variable
    /// changes within the cycle.
    ContinuousAssign { lhs: String, rhs: Expression },
    IfThenElse {
        cond: Expression,
        then_branch: Box<Statement>,
        else_branch: Box<Statement>,
    },
    Sequence(Vec<Statement>),
}

impl Statement {
    /// Flattens nested sequences so `Sequence` never directly contains
    /// `Sequence` and single-statement sequences collapse.
    pub fn normalize(self) -> Statement {
        match self {
            Statement::Sequence(items) => {
                let mut out = Vec::new();
                for item in items {
                    match item.normalize() {
                        Statement::Sequence(inner) => out.extend(inner),
                        Statement::Skip => {}
                        other => out.push(other),
                    }
                }
                match out.len() {
                    0 => Statement::Skip,
                    1 => out.into_iter().next().unwrap(),
                    _ => Statement::Sequence(out),
                }
            }
            Statement::IfThenElse {
                cond,
                then_branch,
                else_branch,
            } => Statement::IfThenElse {
                cond,
                then_branch: Box::new(then_branch.normalize()),
                else_branch: Box::new(else_branch.normalize()),
            },
            other => other,
        }
    }

    /// Iterates over the statement tree in evaluation order.
    pub fn visit(&self, f: &mut impl FnMut(&Statement)) {
        f(self);
        match self {
            Statement::Sequence(items) => {
                for s in items {
                    s.visit(f);
                }
            }
            Statement::IfThenElse {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.visit(f);
                else_branch.visit(f);
            }
            _ => {}
        }
    }

    /// Variables assigned anywhere in this statement, with the assignment kind.
    pub fn assigned_vars(&self) -> Vec<(String, AssignKind)> {
        let mut out = Vec::new();
        self.visit(&mut |s| match s {
            Statement::BlockingAssign { lhs, .. } => out.push((lhs.clone(), AssignKind::Blocking)),
            Statement::NonBlockingAssign { lhs, .. } => {
                out.push((lhs.clone(), AssignKind::NonBlocking))
            }
            Statement::ContinuousAssign { lhs, .. } => {
                out.push((lhs.clone(), AssignKind::Continuous))
            }
            _ => {}
        });
        out
    }

    /// Variables read anywhere in this statement (right-hand sides and guards).
    pub fn read_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |s| match s {
            Statement::BlockingAssign { rhs, .. }
            | Statement::NonBlockingAssign { rhs, .. }
            | Statement::ContinuousAssign { rhs, .. } => rhs.collect_free_vars(&mut out),
            Statement::IfThenElse { cond, .. } => cond.collect_free_vars(&mut out),
            _ => {}
        });
        out
    }

    pub fn rename_vars(&self, f: &impl Fn(&str) -> String) -> Statement {
        match self {
            Statement::Skip => Statement::Skip,
            Statement::BlockingAssign { lhs, rhs } => Statement::BlockingAssign {
                lhs: f(lhs),
                rhs: rhs.rename_vars(f),
            },
            Statement::NonBlockingAssign { lhs, rhs } => Statement::NonBlockingAssign {
                lhs: f(lhs),
                rhs: rhs.rename_vars(f),
            },
            Statement::ContinuousAssign { lhs, rhs } => Statement::ContinuousAssign {
                lhs: f(lhs),
                rhs: rhs.rename_vars(f),
            },
            Statement::IfThenElse {
                cond,
                then_branch,
                else_branch,
            } => Statement::IfThenElse {
                cond: cond.rename_vars(f),
                then_branch: Box::new(then_branch.rename_vars(f)),
                else_branch: Box::new(else_branch.rename_vars(f)),
            },
            Statement::Sequence(items) => {
                Statement::Sequence(items.iter().map(|s| s.rename_vars(f)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssignKind {
    Blocking,
    NonBlocking,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProcessKind {
    /// Runs its body once per cycle in scheduling order.
    Sequential,
    /// Holds continuous assignments, re-fired on right-hand-side changes.
    Continuous,
}

pub type ProcessId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Process {
    pub id: ProcessId,
    pub kind: ProcessKind,
    pub body: Statement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StorageClass {
    Register,
    Wire,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarInfo {
    pub name: String,
    pub class: StorageClass,
    pub width: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub processes: Vec<Process>,
    pub vars: BTreeMap<String, VarInfo>,
}

impl Program {
    pub fn var(&self, name: &str) -> Option<&VarInfo> {
        self.vars.get(name)
    }

    pub fn is_wire(&self, name: &str) -> bool {
        matches!(
            self.vars.get(name),
            Some(VarInfo {
                class: StorageClass::Wire,
                ..
            })
        )
    }

    pub fn is_register(&self, name: &str) -> bool {
        matches!(
            self.vars.get(name),
            Some(VarInfo {
                class: StorageClass::Register,
                ..
            })
        )
    }

    pub fn registers(&self) -> impl Iterator<Item = &VarInfo> {
        self.vars
            .values()
            .filter(|v| v.class == StorageClass::Register)
    }

    pub fn wires(&self) -> impl Iterator<Item = &VarInfo> {
        self.vars.values().filter(|v| v.class == StorageClass::Wire)
    }

    /// All continuous assignments across all processes, in process order.
    pub fn continuous_assigns(&self) -> Vec<(ProcessId, String, Expression)> {
        let mut out = Vec::new();
        for p in &self.processes {
            if p.kind != ProcessKind::Continuous {
                continue;
            }
            p.body.visit(&mut |s| {
                if let Statement::ContinuousAssign { lhs, rhs } = s {
                    out.push((p.id, lhs.clone(), rhs.clone()));
                }
            });
        }
        out
    }

    /// Registers whose value is read anywhere in the program. Together with
    /// the sources and assumption variables these form the state the
    /// brute-force oracle enumerates initial values for.
    pub fn read_registers(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for p in &self.processes {
            for v in p.body.read_vars() {
                if self.is_register(&v) {
                    out.insert(v);
                }
            }
        }
        out
    }
}

/// One side of a two-run formula atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
    Both,
}

/// Atoms of the assumption language. Assumptions relate a left and a right
/// execution; `EqLR(x)` is the workhorse `x_L = x_R`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormulaAtom {
    /// `x_L = x_R`.
    EqLR(String),
    /// `x_side = c` (with `Both` pinning the constant in both runs).
    EqConst(Side, String, u64),
    /// `x_side = y_side`, a same-run equality (with `Both` asserting it in
    /// both runs).
    EqVars(Side, String, String),
}

/// A conjunction of atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formula {
    pub atoms: Vec<FormulaAtom>,
}

impl Formula {
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for a in &self.atoms {
            match a {
                FormulaAtom::EqLR(x) | FormulaAtom::EqConst(_, x, _) => {
                    out.insert(x.clone());
                }
                FormulaAtom::EqVars(_, x, y) => {
                    out.insert(x.clone());
                    out.insert(y.clone());
                }
            }
        }
        out
    }
}

/// Sources, sinks, and the usage assumptions a design is verified under.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub sources: BTreeSet<String>,
    pub sinks: BTreeSet<String>,
    pub initial_eq: Vec<Formula>,
    pub always_eq: Vec<Formula>,
}

impl AnnotationSet {
    pub fn formula_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for f in self.initial_eq.iter().chain(self.always_eq.iter()) {
            out.extend(f.vars());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub message: String,
}

impl Diagnostic {
    fn new(message: impl Into<String>) -> Self {
        Diagnostic {
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

/// Checks every structural invariant of the IR and the annotations. Returns
/// all violations; an empty list means the program is well-formed. This never
/// aborts — malformed input only produces diagnostics.
pub fn validate_program(program: &Program, annots: &AnnotationSet) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    for (name, info) in &program.vars {
        if info.width < 1 {
            diags.push(Diagnostic::new(format!(
                "variable `{name}` has width 0; widths must be at least 1"
            )));
        }
        if info.name != *name {
            diags.push(Diagnostic::new(format!(
                "variable table key `{name}` does not match declared name `{}`",
                info.name
            )));
        }
    }

    let mut seen_ids = BTreeSet::new();
    for p in &program.processes {
        if !seen_ids.insert(p.id) {
            diags.push(Diagnostic::new(format!(
                "duplicate process id {} across the program",
                p.id
            )));
        }
        let mut continuous_stmts = 0usize;
        let mut other_stmts = 0usize;
        p.body.visit(&mut |s| {
            match s {
                Statement::ContinuousAssign { lhs, .. } => {
                    continuous_stmts += 1;
                    if !program.is_wire(lhs) {
                        diags.push(Diagnostic::new(format!(
                            "process {}: continuous assignment target must be a wire, `{lhs}` is not",
                            p.id
                        )));
                    }
                }
                Statement::BlockingAssign { lhs, .. }
                | Statement::NonBlockingAssign { lhs, .. } => {
                    other_stmts += 1;
                    if !program.is_register(lhs) {
                        diags.push(Diagnostic::new(format!(
                            "process {}: assignment target must be a register, `{lhs}` is not",
                            p.id
                        )));
                    }
                }
                Statement::IfThenElse { .. } => other_stmts += 1,
                Statement::Skip | Statement::Sequence(_) => {}
            }
            for v in match s {
                Statement::BlockingAssign { rhs, .. }
                | Statement::NonBlockingAssign { rhs, .. }
                | Statement::ContinuousAssign { rhs, .. } => rhs.free_vars(),
                Statement::IfThenElse { cond, .. } => cond.free_vars(),
                _ => BTreeSet::new(),
            } {
                if !program.vars.contains_key(&v) {
                    diags.push(Diagnostic::new(format!(
                        "process {}: reference to undeclared variable `{v}`",
                        p.id
                    )));
                }
            }
        });
        match p.kind {
            ProcessKind::Continuous => {
                if continuous_stmts == 0 {
                    diags.push(Diagnostic::new(format!(
                        "continuous process {} contains no continuous assignment",
                        p.id
                    )));
                }
                if other_stmts > 0 {
                    diags.push(Diagnostic::new(format!(
                        "continuous process {} contains non-continuous statements",
                        p.id
                    )));
                }
            }
            ProcessKind::Sequential => {
                if continuous_stmts > 0 {
                    diags.push(Diagnostic::new(format!(
                        "sequential process {} contains continuous assignments",
                        p.id
                    )));
                }
            }
        }
        check_funapps(&p.body, p.id, &mut diags);
    }

    for s in &annots.sources {
        if !program.is_register(s) {
            diags.push(Diagnostic::new(format!("source must be a register: `{s}`")));
        }
    }
    for s in &annots.sinks {
        if !program.is_register(s) {
            diags.push(Diagnostic::new(format!("sink must be a register: `{s}`")));
        }
    }
    for f in annots.initial_eq.iter().chain(annots.always_eq.iter()) {
        for v in f.vars() {
            if !program.vars.contains_key(&v) {
                diags.push(Diagnostic::new(format!(
                    "assumption refers to undeclared variable `{v}`"
                )));
            }
        }
    }

    diags
}

fn check_funapps(s: &Statement, pid: ProcessId, diags: &mut Vec<Diagnostic>) {
    fn walk(e: &Expression, pid: ProcessId, diags: &mut Vec<Diagnostic>) {
        if let Expression::FunApp(sym, args) = e {
            if args.is_empty() {
                diags.push(Diagnostic::new(format!(
                    "process {pid}: function application `{sym}` with no arguments"
                )));
            }
            for a in args {
                walk(a, pid, diags);
            }
        }
    }
    s.visit(&mut |st| match st {
        Statement::BlockingAssign { rhs, .. }
        | Statement::NonBlockingAssign { rhs, .. }
        | Statement::ContinuousAssign { rhs, .. } => walk(rhs, pid, diags),
        Statement::IfThenElse { cond, .. } => walk(cond, pid, diags),
        _ => {}
    });
}
