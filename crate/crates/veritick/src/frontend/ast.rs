//! Surface syntax tree for the supported Verilog subset.

use serde::{Deserialize, Serialize};

use crate::ir::Expression;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortDirection {
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Port {
    pub direction: PortDirection,
    pub is_reg: bool,
    pub width: u8,
    pub name: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    Reg,
    Wire,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Declaration {
    pub kind: DeclKind,
    pub width: u8,
    pub name: String,
    pub span: SourceSpan,
}

/// Whether an always block is clocked or combinational. Edge polarity is
/// recorded only so diagnostics can mention it; both edges translate the
/// same way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sensitivity {
    PosEdge,
    NegEdge,
    Star,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerilogStmt {
    Block(Vec<VerilogStmt>),
    If {
        cond: Expression,
        then_branch: Box<VerilogStmt>,
        else_branch: Option<Box<VerilogStmt>>,
    },
    Case {
        scrutinee: Expression,
        arms: Vec<(Vec<Expression>, VerilogStmt)>,
        default: Option<Box<VerilogStmt>>,
    },
    Blocking {
        lhs: String,
        rhs: Expression,
        span: SourceSpan,
    },
    NonBlocking {
        lhs: String,
        rhs: Expression,
        span: SourceSpan,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModuleItem {
    AlwaysBlock {
        sensitivity: Sensitivity,
        body: VerilogStmt,
        span: SourceSpan,
    },
    ContinuousAssignItem {
        lhs: String,
        rhs: Expression,
        span: SourceSpan,
    },
    ModuleInstance {
        module: String,
        instance: String,
        /// Port connections as (formal, actual); positional connections are
        /// resolved against the instantiated module during normalization.
        connections: Vec<PortConnection>,
        span: SourceSpan,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PortConnection {
    Named { formal: String, actual: String },
    Positional { actual: String },
}

/// Annotation comments attached to a module.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModuleAnnotations {
    pub sources: Vec<String>,
    pub sinks: Vec<String>,
    /// `assume(x = c)` — the register is pinned to the constant in both runs.
    pub assumes: Vec<(String, u64)>,
    /// `init_eq(x)` — flushed, equal across runs at cycle 0.
    pub init_eq: Vec<String>,
    /// `always_eq(x)` — equal across runs at every cycle.
    pub always_eq: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerilogModuleAst {
    pub name: String,
    pub ports: Vec<Port>,
    pub declarations: Vec<Declaration>,
    pub items: Vec<ModuleItem>,
    pub annotations: ModuleAnnotations,
    pub span: SourceSpan,
}
