//! Verilog frontend: parse, normalize, translate.
//!
//! The supported subset is module/endmodule, input/output/reg/wire with
//! constant `[msb:0]` widths, `always @(posedge clk)` / `@(negedge clk)` /
//! `@(*)`, begin/end, if/else, case with constant labels,
//! blocking/non-blocking/continuous assignments, non-parameterized module
//! instantiation with identifier port connections, bit- and part-selects with
//! constant indices, concatenation, and the usual operator set. Delays,
//! initial blocks, event controls, x/z values, and generate loops are
//! rejected with a spanned error.
//!
//! Annotation comments carry the verification interface:
//!
//! ```text
//! // source(x); sink(out);
//! // assume(ct = 1);
//! // init_eq(state); always_eq(instr);
//! ```

pub mod ast;
mod lex;
mod normalize;
mod parse;
mod translate;

pub use ast::{SourceSpan, VerilogModuleAst};
pub use normalize::normalize;
pub use parse::parse_verilog;
pub use translate::translate;

use thiserror::Error;

use crate::ir::{AnnotationSet, Program};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at {span}: {message}")]
pub struct SyntaxError {
    pub span: SourceSpan,
    pub message: String,
}

impl SyntaxError {
    pub(crate) fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        SyntaxError {
            span,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontendError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("cyclic module instantiation: {}", chain.join(" -> "))]
    CyclicInstantiation { chain: Vec<String> },
    #[error("unknown module `{name}`")]
    UnknownModule { name: String },
    #[error("module `{name}` defined more than once")]
    DuplicateModule { name: String },
    #[error("unsupported construct at {span}: {message}")]
    Unsupported { span: SourceSpan, message: String },
}

/// Parse, flatten under `top`, and translate in one step.
pub fn compile(text: &str, top: &str) -> Result<(Program, AnnotationSet), FrontendError> {
    let asts = parse_verilog(text)?;
    let flat = normalize(&asts, top)?;
    translate(&flat)
}
