//! Recursive-descent parser for the Verilog subset.

use super::ast::*;
use super::lex::{lex, SpannedTok, Tok};
use super::SyntaxError;
use crate::ir::{sym, Expression};

pub(super) struct Cursor {
    toks: Vec<SpannedTok>,
    pos: usize,
    /// Annotations seen so far and not yet claimed by a module.
    pending: Vec<(SourceSpan, String, String)>,
}

impl Cursor {
    /// Moves annotation tokens out of the stream as they are encountered.
    fn skim(&mut self) {
        while let Some((span, Tok::Annotation { key, body })) = self.toks.get(self.pos) {
            self.pending.push((*span, key.clone(), body.clone()));
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<&Tok> {
        self.skim();
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn span(&mut self) -> SourceSpan {
        self.skim();
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(s, _)| *s)
            .unwrap_or(SourceSpan { line: 1, col: 1 })
    }

    fn next(&mut self) -> Option<Tok> {
        self.skim();
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn err(&mut self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.span(), msg)
    }

    fn eat_punct(&mut self, p: &'static str) -> bool {
        if self.peek() == Some(&Tok::Punct(p)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &'static str) -> Result<(), SyntaxError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{p}`")))
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(w)) if w == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{kw}`")))
        }
    }

    fn expect_ident(&mut self) -> Result<String, SyntaxError> {
        match self.next() {
            Some(Tok::Ident(w)) if !is_keyword(&w) => Ok(w),
            Some(Tok::Ident(w)) => Err(self.err(format!("keyword `{w}` used as identifier"))),
            _ => Err(self.err("expected identifier")),
        }
    }
}

fn is_keyword(w: &str) -> bool {
    matches!(
        w,
        "module"
            | "endmodule"
            | "input"
            | "output"
            | "inout"
            | "reg"
            | "wire"
            | "always"
            | "assign"
            | "begin"
            | "end"
            | "if"
            | "else"
            | "case"
            | "casez"
            | "casex"
            | "endcase"
            | "default"
            | "posedge"
            | "negedge"
            | "initial"
            | "generate"
            | "endgenerate"
            | "for"
            | "while"
            | "forever"
            | "repeat"
            | "parameter"
            | "localparam"
            | "function"
            | "task"
            | "integer"
            | "real"
    )
}

const NON_SYNTH: &[&str] = &["initial", "forever", "repeat", "while", "real"];
const UNSUPPORTED: &[&str] = &[
    "generate",
    "for",
    "parameter",
    "localparam",
    "function",
    "task",
    "integer",
    "inout",
    "casez",
    "casex",
];

/// Parses a source file into one AST per module, with annotation comments
/// attached to the module they precede or appear in.
pub fn parse_verilog(text: &str) -> Result<Vec<VerilogModuleAst>, SyntaxError> {
    let toks = lex(text)?;
    let mut cur = Cursor {
        toks,
        pos: 0,
        pending: Vec::new(),
    };
    let mut modules = Vec::new();
    while cur.peek().is_some() {
        modules.push(parse_module(&mut cur)?);
    }
    Ok(modules)
}

fn parse_module(cur: &mut Cursor) -> Result<VerilogModuleAst, SyntaxError> {
    let span = cur.span();
    if let Some(Tok::Ident(w)) = cur.peek() {
        let w = w.clone();
        if NON_SYNTH.contains(&w.as_str()) {
            return Err(cur.err(format!("non-synthesizable construct: `{w}`")));
        }
        if UNSUPPORTED.contains(&w.as_str()) {
            return Err(cur.err(format!("unsupported construct: `{w}`")));
        }
    }
    cur.expect_kw("module")?;
    let name = cur.expect_ident()?;
    let mut ports = Vec::new();
    if cur.eat_punct("(") {
        if !cur.eat_punct(")") {
            loop {
                ports.push(parse_port(cur)?);
                if cur.eat_punct(")") {
                    break;
                }
                cur.expect_punct(",")?;
            }
        }
    }
    cur.expect_punct(";")?;

    let mut declarations = Vec::new();
    let mut items = Vec::new();
    loop {
        if cur.eat_kw("endmodule") {
            break;
        }
        match cur.peek() {
            None => return Err(cur.err("missing `endmodule`")),
            Some(Tok::Ident(w)) => {
                let w = w.clone();
                if NON_SYNTH.contains(&w.as_str()) {
                    return Err(cur.err(format!("non-synthesizable construct: `{w}`")));
                }
                if UNSUPPORTED.contains(&w.as_str()) {
                    return Err(cur.err(format!("unsupported construct: `{w}`")));
                }
                match w.as_str() {
                    "reg" | "wire" => {
                        let kind = if w == "reg" { DeclKind::Reg } else { DeclKind::Wire };
                        cur.next();
                        let width = parse_opt_range(cur)?;
                        loop {
                            let dspan = cur.span();
                            let name = cur.expect_ident()?;
                            declarations.push(Declaration {
                                kind,
                                width,
                                name,
                                span: dspan,
                            });
                            if cur.eat_punct(";") {
                                break;
                            }
                            cur.expect_punct(",")?;
                        }
                    }
                    "input" | "output" => {
                        // Old-style port direction declarations inside the body.
                        let dir = if w == "input" {
                            PortDirection::Input
                        } else {
                            PortDirection::Output
                        };
                        cur.next();
                        let is_reg = cur.eat_kw("reg");
                        let width = parse_opt_range(cur)?;
                        loop {
                            let pspan = cur.span();
                            let pname = cur.expect_ident()?;
                            ports.push(Port {
                                direction: dir,
                                is_reg,
                                width,
                                name: pname,
                                span: pspan,
                            });
                            if cur.eat_punct(";") {
                                break;
                            }
                            cur.expect_punct(",")?;
                        }
                    }
                    "always" => items.push(parse_always(cur)?),
                    "assign" => {
                        let ispan = cur.span();
                        cur.next();
                        let lhs = parse_assign_target(cur)?;
                        cur.expect_punct("=")?;
                        let rhs = parse_expr(cur)?;
                        cur.expect_punct(";")?;
                        items.push(ModuleItem::ContinuousAssignItem {
                            lhs,
                            rhs,
                            span: ispan,
                        });
                    }
                    _ => {
                        // A bare identifier starts a module instantiation.
                        let ispan = cur.span();
                        let module = cur.expect_ident()?;
                        let instance = cur.expect_ident()?;
                        cur.expect_punct("(")?;
                        let mut connections = Vec::new();
                        if !cur.eat_punct(")") {
                            loop {
                                if cur.eat_punct(".") {
                                    let formal = cur.expect_ident()?;
                                    cur.expect_punct("(")?;
                                    let actual = cur.expect_ident()?;
                                    cur.expect_punct(")")?;
                                    connections.push(PortConnection::Named { formal, actual });
                                } else {
                                    let actual = cur.expect_ident()?;
                                    connections.push(PortConnection::Positional { actual });
                                }
                                if cur.eat_punct(")") {
                                    break;
                                }
                                cur.expect_punct(",")?;
                            }
                        }
                        cur.expect_punct(";")?;
                        items.push(ModuleItem::ModuleInstance {
                            module,
                            instance,
                            connections,
                            span: ispan,
                        });
                    }
                }
            }
            Some(other) => {
                let msg = format!("unexpected token {other:?} in module body");
                return Err(cur.err(msg));
            }
        }
    }

    let mut annotations = ModuleAnnotations::default();
    for (aspan, key, body) in std::mem::take(&mut cur.pending) {
        apply_annotation(&mut annotations, aspan, &key, &body)?;
    }

    Ok(VerilogModuleAst {
        name,
        ports,
        declarations,
        items,
        annotations,
        span,
    })
}

fn apply_annotation(
    out: &mut ModuleAnnotations,
    span: SourceSpan,
    key: &str,
    body: &str,
) -> Result<(), SyntaxError> {
    let ident = |s: &str| -> Result<String, SyntaxError> {
        let s = s.trim();
        if s.is_empty() || !s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$') {
            Err(SyntaxError::new(
                span,
                format!("annotation `{key}({body})` expects a variable name"),
            ))
        } else {
            Ok(s.to_string())
        }
    };
    match key {
        "source" => out.sources.push(ident(body)?),
        "sink" => out.sinks.push(ident(body)?),
        "init_eq" => out.init_eq.push(ident(body)?),
        "always_eq" => out.always_eq.push(ident(body)?),
        "assume" => {
            let Some((var, val)) = body.split_once('=') else {
                return Err(SyntaxError::new(
                    span,
                    format!("assume annotation must look like `assume(x = c)`, got `{body}`"),
                ));
            };
            let var = ident(var)?;
            let val: u64 = val.trim().parse().map_err(|_| {
                SyntaxError::new(span, format!("assume constant `{}` is not an integer", val.trim()))
            })?;
            out.assumes.push((var, val));
        }
        _ => unreachable!("lexer only emits known annotation keys"),
    }
    Ok(())
}

fn parse_port(cur: &mut Cursor) -> Result<Port, SyntaxError> {
    let span = cur.span();
    let direction = if cur.eat_kw("input") {
        PortDirection::Input
    } else if cur.eat_kw("output") {
        PortDirection::Output
    } else if cur.eat_kw("inout") {
        return Err(cur.err("unsupported construct: `inout`"));
    } else {
        return Err(cur.err("expected `input` or `output`"));
    };
    let is_reg = cur.eat_kw("reg");
    let width = parse_opt_range(cur)?;
    let name = cur.expect_ident()?;
    Ok(Port {
        direction,
        is_reg,
        width,
        name,
        span,
    })
}

/// `[msb:0]` or nothing (width 1).
fn parse_opt_range(cur: &mut Cursor) -> Result<u8, SyntaxError> {
    if !cur.eat_punct("[") {
        return Ok(1);
    }
    let msb = parse_const_int(cur)?;
    cur.expect_punct(":")?;
    let lsb = parse_const_int(cur)?;
    cur.expect_punct("]")?;
    if lsb != 0 {
        return Err(cur.err("ranges must be of the form [msb:0]"));
    }
    if msb >= 64 {
        return Err(cur.err("widths above 64 bits are not supported"));
    }
    Ok((msb + 1) as u8)
}

fn parse_const_int(cur: &mut Cursor) -> Result<u64, SyntaxError> {
    match cur.next() {
        Some(Tok::Number { value, .. }) => Ok(value),
        _ => Err(cur.err("expected integer constant")),
    }
}

fn parse_always(cur: &mut Cursor) -> Result<ModuleItem, SyntaxError> {
    let span = cur.span();
    cur.expect_kw("always")?;
    let sensitivity = if cur.eat_punct("@*") {
        Sensitivity::Star
    } else {
        cur.expect_punct("@")?;
        if cur.eat_punct("*") {
            Sensitivity::Star
        } else {
            cur.expect_punct("(")?;
            let s = if cur.eat_punct("*") {
                Sensitivity::Star
            } else if cur.eat_kw("posedge") {
                cur.expect_ident()?;
                Sensitivity::PosEdge
            } else if cur.eat_kw("negedge") {
                cur.expect_ident()?;
                Sensitivity::NegEdge
            } else {
                return Err(cur.err(
                    "unsupported sensitivity list; use @(posedge clk), @(negedge clk) or @(*)",
                ));
            };
            cur.expect_punct(")")?;
            s
        }
    };
    let body = parse_stmt(cur)?;
    Ok(ModuleItem::AlwaysBlock {
        sensitivity,
        body,
        span,
    })
}

fn parse_assign_target(cur: &mut Cursor) -> Result<String, SyntaxError> {
    if cur.peek() == Some(&Tok::Punct("{")) {
        return Err(cur.err("assignments to multiple variables are not supported"));
    }
    let name = cur.expect_ident()?;
    if cur.peek() == Some(&Tok::Punct("[")) {
        return Err(cur.err("assignments to bit- or part-selects are not supported"));
    }
    Ok(name)
}

fn parse_stmt(cur: &mut Cursor) -> Result<VerilogStmt, SyntaxError> {
    if let Some(Tok::Ident(w)) = cur.peek() {
        let w = w.clone();
        if NON_SYNTH.contains(&w.as_str()) {
            return Err(cur.err(format!("non-synthesizable construct: `{w}`")));
        }
        if UNSUPPORTED.contains(&w.as_str()) {
            return Err(cur.err(format!("unsupported construct: `{w}`")));
        }
    }
    if cur.eat_kw("begin") {
        let mut stmts = Vec::new();
        while !cur.eat_kw("end") {
            if cur.peek().is_none() {
                return Err(cur.err("missing `end`"));
            }
            stmts.push(parse_stmt(cur)?);
        }
        return Ok(VerilogStmt::Block(stmts));
    }
    if cur.eat_kw("if") {
        cur.expect_punct("(")?;
        let cond = parse_expr(cur)?;
        cur.expect_punct(")")?;
        let then_branch = Box::new(parse_stmt(cur)?);
        let else_branch = if cur.eat_kw("else") {
            Some(Box::new(parse_stmt(cur)?))
        } else {
            None
        };
        return Ok(VerilogStmt::If {
            cond,
            then_branch,
            else_branch,
        });
    }
    if cur.eat_kw("case") {
        cur.expect_punct("(")?;
        let scrutinee = parse_expr(cur)?;
        cur.expect_punct(")")?;
        let mut arms = Vec::new();
        let mut default = None;
        loop {
            if cur.eat_kw("endcase") {
                break;
            }
            if cur.eat_kw("default") {
                cur.eat_punct(":");
                default = Some(Box::new(parse_stmt(cur)?));
                continue;
            }
            if cur.peek().is_none() {
                return Err(cur.err("missing `endcase`"));
            }
            let mut labels = vec![parse_case_label(cur)?];
            while cur.eat_punct(",") {
                labels.push(parse_case_label(cur)?);
            }
            cur.expect_punct(":")?;
            arms.push((labels, parse_stmt(cur)?));
        }
        return Ok(VerilogStmt::Case {
            scrutinee,
            arms,
            default,
        });
    }
    // Assignment.
    let span = cur.span();
    let lhs = parse_assign_target(cur)?;
    if cur.eat_punct("=") {
        let rhs = parse_expr(cur)?;
        cur.expect_punct(";")?;
        Ok(VerilogStmt::Blocking { lhs, rhs, span })
    } else if cur.eat_punct("<=") {
        let rhs = parse_expr(cur)?;
        cur.expect_punct(";")?;
        Ok(VerilogStmt::NonBlocking { lhs, rhs, span })
    } else {
        Err(cur.err("expected `=` or `<=`"))
    }
}

fn parse_case_label(cur: &mut Cursor) -> Result<Expression, SyntaxError> {
    match cur.next() {
        Some(Tok::Number { value, .. }) => Ok(Expression::ConstInt(value)),
        _ => Err(cur.err("case labels must be integer constants")),
    }
}

fn binop_prec(p: &str) -> Option<u8> {
    Some(match p {
        "||" => 1,
        "&&" => 2,
        "|" => 3,
        "^" => 4,
        "&" => 5,
        "==" | "!=" => 6,
        "<" | "<=" | ">" | ">=" => 7,
        "<<" | ">>" => 8,
        "+" | "-" => 9,
        "*" => 10,
        _ => return None,
    })
}

pub(super) fn parse_expr(cur: &mut Cursor) -> Result<Expression, SyntaxError> {
    let cond = parse_binary(cur, 1)?;
    if cur.eat_punct("?") {
        let t = parse_binary(cur, 1)?;
        cur.expect_punct(":")?;
        let f = parse_expr(cur)?;
        return Ok(Expression::app(sym::MUX, vec![cond, t, f]));
    }
    Ok(cond)
}

fn parse_binary(cur: &mut Cursor, min_prec: u8) -> Result<Expression, SyntaxError> {
    let mut lhs = parse_unary(cur)?;
    loop {
        let (op, prec) = match cur.peek() {
            Some(Tok::Punct(p)) => match binop_prec(p) {
                Some(prec) if prec >= min_prec => (*p, prec),
                _ => break,
            },
            _ => break,
        };
        // `x <= e` at statement level is not a comparison; the statement
        // parser consumes `<=` before ever reaching here.
        cur.next();
        let rhs = parse_binary(cur, prec + 1)?;
        lhs = Expression::app(op, vec![lhs, rhs]);
    }
    Ok(lhs)
}

fn parse_unary(cur: &mut Cursor) -> Result<Expression, SyntaxError> {
    if cur.eat_punct("!") {
        return Ok(Expression::app(sym::LOG_NOT, vec![parse_unary(cur)?]));
    }
    if cur.eat_punct("~") {
        return Ok(Expression::app(sym::BIT_NOT, vec![parse_unary(cur)?]));
    }
    if cur.eat_punct("-") {
        return Ok(Expression::app(
            sym::SUB,
            vec![Expression::int(0), parse_unary(cur)?],
        ));
    }
    parse_postfix(cur)
}

fn parse_postfix(cur: &mut Cursor) -> Result<Expression, SyntaxError> {
    let mut e = parse_primary(cur)?;
    while cur.eat_punct("[") {
        let hi = parse_const_int(cur)?;
        if cur.eat_punct(":") {
            let lo = parse_const_int(cur)?;
            cur.expect_punct("]")?;
            e = Expression::app(
                sym::PART,
                vec![e, Expression::ConstInt(hi), Expression::ConstInt(lo)],
            );
        } else {
            cur.expect_punct("]")?;
            e = Expression::app(sym::SELECT, vec![e, Expression::ConstInt(hi)]);
        }
    }
    Ok(e)
}

fn parse_primary(cur: &mut Cursor) -> Result<Expression, SyntaxError> {
    match cur.next() {
        Some(Tok::Number { value, .. }) => Ok(Expression::ConstInt(value)),
        Some(Tok::Ident(w)) if !is_keyword(&w) => Ok(Expression::VarRef(w)),
        Some(Tok::Punct("(")) => {
            let e = parse_expr(cur)?;
            cur.expect_punct(")")?;
            Ok(e)
        }
        Some(Tok::Punct("{")) => {
            let mut args = Vec::new();
            loop {
                args.push(parse_expr(cur)?);
                if cur.eat_punct("}") {
                    break;
                }
                cur.expect_punct(",")?;
            }
            Ok(Expression::app(sym::CONCAT, args))
        }
        _ => Err(cur.err("expected expression")),
    }
}
