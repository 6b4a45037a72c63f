//! Printer for the textual IR format.
//!
//! The format is the stable boundary between the frontend and the backend:
//! declarations first, then annotations, then one block per process in
//! ascending id order. Re-emitting the same program is byte-identical.

use std::fmt::Write;

use super::{
    sym, AnnotationSet, Expression, Formula, FormulaAtom, ProcessKind, Program, Side, Statement,
    StorageClass,
};

/// Precedence table for infix rendering; higher binds tighter.
fn precedence(op: &str) -> Option<u8> {
    Some(match op {
        sym::LOG_OR => 1,
        sym::LOG_AND => 2,
        sym::BIT_OR => 3,
        sym::BIT_XOR => 4,
        sym::BIT_AND => 5,
        sym::EQ | sym::NE => 6,
        sym::LT | sym::LE | sym::GT | sym::GE => 7,
        sym::SHL | sym::SHR => 8,
        sym::ADD | sym::SUB => 9,
        sym::MUL => 10,
        _ => return None,
    })
}

fn write_expr(out: &mut String, e: &Expression, parent_prec: u8) {
    match e {
        Expression::VarRef(v) => out.push_str(v),
        Expression::ConstInt(n) => {
            let _ = write!(out, "{n}");
        }
        Expression::FunApp(op, args) => write_funapp(out, op, args, parent_prec),
    }
}

fn write_funapp(out: &mut String, op: &str, args: &[Expression], parent_prec: u8) {
    match (op, args) {
        (sym::LOG_NOT | sym::BIT_NOT, [a]) => {
            out.push_str(if op == sym::LOG_NOT { "!" } else { "~" });
            write_expr(out, a, 11);
        }
        (sym::MUX, [c, t, f]) => {
            let need_paren = parent_prec > 0;
            if need_paren {
                out.push('(');
            }
            write_expr(out, c, 1);
            out.push_str(" ? ");
            write_expr(out, t, 1);
            out.push_str(" : ");
            write_expr(out, f, 0);
            if need_paren {
                out.push(')');
            }
        }
        (sym::CONCAT, args) if !args.is_empty() => {
            out.push('{');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push('}');
        }
        (sym::SELECT, [a, Expression::ConstInt(i)]) => {
            write_expr(out, a, 11);
            let _ = write!(out, "[{i}]");
        }
        (sym::PART, [a, Expression::ConstInt(hi), Expression::ConstInt(lo)]) => {
            write_expr(out, a, 11);
            let _ = write!(out, "[{hi}:{lo}]");
        }
        (op, [a, b]) if precedence(op).is_some() => {
            let prec = precedence(op).unwrap();
            let need_paren = prec < parent_prec;
            if need_paren {
                out.push('(');
            }
            write_expr(out, a, prec);
            let _ = write!(out, " {op} ");
            // Same-precedence operands on the right get parenthesized so the
            // left-associative parse reproduces the tree exactly.
            write_expr(out, b, prec + 1);
            if need_paren {
                out.push(')');
            }
        }
        (op, args) => {
            out.push_str(op);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push(')');
        }
    }
}

pub fn expr_to_text(e: &Expression) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

pub fn formula_to_text(f: &Formula) -> String {
    let mut parts = Vec::new();
    for atom in &f.atoms {
        parts.push(match atom {
            FormulaAtom::EqLR(x) => x.clone(),
            FormulaAtom::EqConst(side, x, c) => format!("{}{x} = {c}", side_prefix(*side)),
            FormulaAtom::EqVars(side, x, y) => format!("{}{x} = {y}", side_prefix(*side)),
        });
    }
    parts.join(" && ")
}

fn side_prefix(side: Side) -> &'static str {
    match side {
        Side::Left => "L ",
        Side::Right => "R ",
        Side::Both => "",
    }
}

fn write_stmt(out: &mut String, s: &Statement, indent: usize) {
    let pad = "  ".repeat(indent);
    match s {
        Statement::Skip => {
            let _ = writeln!(out, "{pad}skip;");
        }
        Statement::BlockingAssign { lhs, rhs } => {
            let _ = writeln!(out, "{pad}{lhs} = {};", expr_to_text(rhs));
        }
        Statement::NonBlockingAssign { lhs, rhs } => {
            let _ = writeln!(out, "{pad}{lhs} <= {};", expr_to_text(rhs));
        }
        Statement::ContinuousAssign { lhs, rhs } => {
            let _ = writeln!(out, "{pad}assign {lhs} := {};", expr_to_text(rhs));
        }
        Statement::IfThenElse {
            cond,
            then_branch,
            else_branch,
        } => {
            let _ = writeln!(out, "{pad}if ({}) {{", expr_to_text(cond));
            write_stmt(out, then_branch, indent + 1);
            if matches!(**else_branch, Statement::Skip) {
                let _ = writeln!(out, "{pad}}}");
            } else {
                let _ = writeln!(out, "{pad}}} else {{");
                write_stmt(out, else_branch, indent + 1);
                let _ = writeln!(out, "{pad}}}");
            }
        }
        Statement::Sequence(items) => {
            for item in items {
                write_stmt(out, item, indent);
            }
        }
    }
}

/// Renders a program and its annotations in the textual IR format.
pub fn program_to_text(program: &Program, annots: &AnnotationSet) -> String {
    let mut out = String::new();
    for v in program.vars.values() {
        let kw = match v.class {
            StorageClass::Register => "reg",
            StorageClass::Wire => "wire",
        };
        let _ = writeln!(out, "{kw} {} : {};", v.name, v.width);
    }
    for s in &annots.sources {
        let _ = writeln!(out, "source {s};");
    }
    for s in &annots.sinks {
        let _ = writeln!(out, "sink {s};");
    }
    for f in &annots.initial_eq {
        let _ = writeln!(out, "init_eq {};", formula_to_text(f));
    }
    for f in &annots.always_eq {
        let _ = writeln!(out, "always_eq {};", formula_to_text(f));
    }
    let mut procs: Vec<_> = program.processes.iter().collect();
    procs.sort_by_key(|p| p.id);
    for p in procs {
        let kind = match p.kind {
            ProcessKind::Sequential => "",
            ProcessKind::Continuous => " continuous",
        };
        let _ = writeln!(out, "process {}{kind} {{", p.id);
        if !matches!(p.body, Statement::Skip) {
            write_stmt(&mut out, &p.body, 1);
        }
        let _ = writeln!(out, "}}");
    }
    out
}
