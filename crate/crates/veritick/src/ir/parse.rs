//! Parser for the textual IR format emitted by [`super::program_to_text`].

use std::collections::BTreeMap;

use thiserror::Error;

use super::{
    sym, AnnotationSet, Expression, Formula, FormulaAtom, Process, ProcessKind, Program, Side,
    Statement, StorageClass, VarInfo,
};

#[derive(Debug, Error)]
#[error("IR parse error at line {line}: {message}")]
pub struct IrParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Punct(&'static str),
}

struct Lexer {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

const PUNCTS: &[&str] = &[
    "<=", ":=", "==", "!=", ">=", "<<", ">>", "&&", "||", "<", ">", "=", ";", ":", "{", "}", "(",
    ")", "[", "]", ",", "?", "+", "-", "*", "&", "|", "^", "~", "!",
];

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, IrParseError> {
    let mut toks = Vec::new();
    let mut chars: Vec<char> = text.chars().collect();
    chars.push('\n');
    let mut i = 0;
    let mut line = 1;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '/' && i + 1 < chars.len() && chars[i + 1] == '/' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$')
            {
                i += 1;
            }
            toks.push((line, Tok::Ident(chars[start..i].iter().collect())));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<u64>().map_err(|_| IrParseError {
                line,
                message: format!("integer literal `{s}` out of range"),
            })?;
            toks.push((line, Tok::Int(v)));
            continue;
        }
        let mut matched = false;
        for p in PUNCTS {
            if chars[i..].starts_with(&p.chars().collect::<Vec<_>>()[..]) {
                toks.push((line, Tok::Punct(p)));
                i += p.len();
                matched = true;
                break;
            }
        }
        if !matched {
            return Err(IrParseError {
                line,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(toks)
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|(l, _)| *l)
            .unwrap_or(0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn err(&self, message: impl Into<String>) -> IrParseError {
        IrParseError {
            line: self.line(),
            message: message.into(),
        }
    }

    fn expect_punct(&mut self, p: &'static str) -> Result<(), IrParseError> {
        match self.next() {
            Some(Tok::Punct(q)) if q == p => Ok(()),
            other => Err(self.err(format!("expected `{p}`, found {other:?}"))),
        }
    }

    fn eat_punct(&mut self, p: &'static str) -> bool {
        if self.peek() == Some(&Tok::Punct(p)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_ident(&mut self) -> Result<String, IrParseError> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            other => Err(self.err(format!("expected identifier, found {other:?}"))),
        }
    }

    fn expect_int(&mut self) -> Result<u64, IrParseError> {
        match self.next() {
            Some(Tok::Int(v)) => Ok(v),
            other => Err(self.err(format!("expected integer, found {other:?}"))),
        }
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

fn parse_expr(lx: &mut Lexer) -> Result<Expression, IrParseError> {
    let cond = parse_binary(lx, 1)?;
    if lx.eat_punct("?") {
        let t = parse_binary(lx, 1)?;
        lx.expect_punct(":")?;
        let f = parse_expr(lx)?;
        return Ok(Expression::app(sym::MUX, vec![cond, t, f]));
    }
    Ok(cond)
}

fn parse_binary(lx: &mut Lexer, min_prec: u8) -> Result<Expression, IrParseError> {
    let mut lhs = parse_unary(lx)?;
    loop {
        let op = match lx.peek() {
            Some(Tok::Punct(p)) => match binop_prec(p) {
                Some(prec) if prec >= min_prec => (*p, prec),
                _ => break,
            },
            _ => break,
        };
        lx.next();
        let rhs = parse_binary(lx, op.1 + 1)?;
        lhs = Expression::app(op.0, vec![lhs, rhs]);
    }
    Ok(lhs)
}

fn parse_unary(lx: &mut Lexer) -> Result<Expression, IrParseError> {
    if lx.eat_punct("!") {
        return Ok(Expression::app(sym::LOG_NOT, vec![parse_unary(lx)?]));
    }
    if lx.eat_punct("~") {
        return Ok(Expression::app(sym::BIT_NOT, vec![parse_unary(lx)?]));
    }
    parse_postfix(lx)
}

fn parse_postfix(lx: &mut Lexer) -> Result<Expression, IrParseError> {
    let mut e = parse_primary(lx)?;
    while lx.eat_punct("[") {
        let hi = lx.expect_int()?;
        if lx.eat_punct(":") {
            let lo = lx.expect_int()?;
            lx.expect_punct("]")?;
            e = Expression::app(
                sym::PART,
                vec![e, Expression::ConstInt(hi), Expression::ConstInt(lo)],
            );
        } else {
            lx.expect_punct("]")?;
            e = Expression::app(sym::SELECT, vec![e, Expression::ConstInt(hi)]);
        }
    }
    Ok(e)
}

fn parse_primary(lx: &mut Lexer) -> Result<Expression, IrParseError> {
    match lx.next() {
        Some(Tok::Int(v)) => Ok(Expression::ConstInt(v)),
        Some(Tok::Ident(name)) => {
            if lx.eat_punct("(") {
                let mut args = Vec::new();
                if !lx.eat_punct(")") {
                    loop {
                        args.push(parse_expr(lx)?);
                        if lx.eat_punct(")") {
                            break;
                        }
                        lx.expect_punct(",")?;
                    }
                }
                Ok(Expression::FunApp(name, args))
            } else {
                Ok(Expression::VarRef(name))
            }
        }
        Some(Tok::Punct("(")) => {
            let e = parse_expr(lx)?;
            lx.expect_punct(")")?;
            Ok(e)
        }
        Some(Tok::Punct("{")) => {
            let mut args = Vec::new();
            loop {
                args.push(parse_expr(lx)?);
                if lx.eat_punct("}") {
                    break;
                }
                lx.expect_punct(",")?;
            }
            Ok(Expression::app(sym::CONCAT, args))
        }
        other => Err(lx.err(format!("expected expression, found {other:?}"))),
    }
}

fn parse_stmt(lx: &mut Lexer) -> Result<Statement, IrParseError> {
    match lx.peek() {
        Some(Tok::Ident(kw)) if kw == "skip" => {
            lx.next();
            lx.expect_punct(";")?;
            Ok(Statement::Skip)
        }
        Some(Tok::Ident(kw)) if kw == "assign" => {
            lx.next();
            let lhs = lx.expect_ident()?;
            lx.expect_punct(":=")?;
            let rhs = parse_expr(lx)?;
            lx.expect_punct(";")?;
            Ok(Statement::ContinuousAssign { lhs, rhs })
        }
        Some(Tok::Ident(kw)) if kw == "if" => {
            lx.next();
            lx.expect_punct("(")?;
            let cond = parse_expr(lx)?;
            lx.expect_punct(")")?;
            let then_branch = parse_block(lx)?;
            let else_branch = if matches!(lx.peek(), Some(Tok::Ident(k)) if k == "else") {
                lx.next();
                if matches!(lx.peek(), Some(Tok::Ident(k)) if k == "if") {
                    parse_stmt(lx)?
                } else {
                    parse_block(lx)?
                }
            } else {
                Statement::Skip
            };
            Ok(Statement::IfThenElse {
                cond,
                then_branch: Box::new(then_branch),
                else_branch: Box::new(else_branch),
            })
        }
        Some(Tok::Ident(_)) => {
            let lhs = lx.expect_ident()?;
            if lx.eat_punct("=") {
                let rhs = parse_expr(lx)?;
                lx.expect_punct(";")?;
                Ok(Statement::BlockingAssign { lhs, rhs })
            } else if lx.eat_punct("<=") {
                let rhs = parse_expr(lx)?;
                lx.expect_punct(";")?;
                Ok(Statement::NonBlockingAssign { lhs, rhs })
            } else {
                Err(lx.err(format!("expected `=` or `<=` after `{lhs}`")))
            }
        }
        other => Err(lx.err(format!("expected statement, found {other:?}"))),
    }
}

fn parse_block(lx: &mut Lexer) -> Result<Statement, IrParseError> {
    lx.expect_punct("{")?;
    let mut items = Vec::new();
    while !lx.eat_punct("}") {
        items.push(parse_stmt(lx)?);
    }
    Ok(Statement::Sequence(items).normalize())
}

fn parse_formula_atoms(lx: &mut Lexer) -> Result<Formula, IrParseError> {
    let mut atoms = Vec::new();
    loop {
        let first = lx.expect_ident()?;
        let (side, name) = match first.as_str() {
            "L" => (Side::Left, lx.expect_ident()?),
            "R" => (Side::Right, lx.expect_ident()?),
            _ => (Side::Both, first),
        };
        if lx.eat_punct("=") {
            match lx.next() {
                Some(Tok::Int(c)) => atoms.push(FormulaAtom::EqConst(side, name, c)),
                Some(Tok::Ident(y)) => atoms.push(FormulaAtom::EqVars(side, name, y)),
                other => return Err(lx.err(format!("expected constant or variable, found {other:?}"))),
            }
        } else {
            if side != Side::Both {
                return Err(lx.err("side-qualified atom requires `= value`"));
            }
            atoms.push(FormulaAtom::EqLR(name));
        }
        if !lx.eat_punct("&&") {
            break;
        }
    }
    Ok(Formula { atoms })
}

/// Parses a single assumption formula, e.g. `x`, `ct = 1`, or `L a = b && y`.
pub fn parse_formula(text: &str) -> Result<Formula, IrParseError> {
    let mut lx = Lexer {
        toks: lex(text)?,
        pos: 0,
    };
    let f = parse_formula_atoms(&mut lx)?;
    if lx.peek().is_some() {
        return Err(lx.err("trailing input after formula"));
    }
    Ok(f)
}

/// Parses the textual IR format. Inverse of [`super::program_to_text`].
pub fn parse_ir_text(text: &str) -> Result<(Program, AnnotationSet), IrParseError> {
    let mut lx = Lexer {
        toks: lex(text)?,
        pos: 0,
    };
    let mut vars = BTreeMap::new();
    let mut annots = AnnotationSet::default();
    let mut processes = Vec::new();

    while let Some(tok) = lx.peek() {
        let kw = match tok {
            Tok::Ident(s) => s.clone(),
            other => return Err(lx.err(format!("expected declaration, found {other:?}"))),
        };
        match kw.as_str() {
            "reg" | "wire" => {
                lx.next();
                let name = lx.expect_ident()?;
                lx.expect_punct(":")?;
                let width = lx.expect_int()?;
                lx.expect_punct(";")?;
                if width == 0 || width > 64 {
                    return Err(lx.err(format!("width of `{name}` must be in 1..=64")));
                }
                vars.insert(
                    name.clone(),
                    VarInfo {
                        name,
                        class: if kw == "reg" {
                            StorageClass::Register
                        } else {
                            StorageClass::Wire
                        },
                        width: width as u8,
                    },
                );
            }
            "source" => {
                lx.next();
                let name = lx.expect_ident()?;
                lx.expect_punct(";")?;
                annots.sources.insert(name);
            }
            "sink" => {
                lx.next();
                let name = lx.expect_ident()?;
                lx.expect_punct(";")?;
                annots.sinks.insert(name);
            }
            "init_eq" => {
                lx.next();
                let f = parse_formula_atoms(&mut lx)?;
                lx.expect_punct(";")?;
                annots.initial_eq.push(f);
            }
            "always_eq" => {
                lx.next();
                let f = parse_formula_atoms(&mut lx)?;
                lx.expect_punct(";")?;
                annots.always_eq.push(f);
            }
            "process" => {
                lx.next();
                let id = lx.expect_int()? as u32;
                let kind = if matches!(lx.peek(), Some(Tok::Ident(k)) if k == "continuous") {
                    lx.next();
                    ProcessKind::Continuous
                } else {
                    ProcessKind::Sequential
                };
                let body = parse_block(&mut lx)?;
                processes.push(Process { id, kind, body });
            }
            other => return Err(lx.err(format!("unexpected keyword `{other}`"))),
        }
    }

    Ok((Program { processes, vars }, annots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::program_to_text;

    #[test]
    fn round_trips_a_small_program() {
        let text = "\
reg x : 1;
reg out : 2;
wire w : 1;
source x;
sink out;
always_eq ct_is_on = 1;
process 0 continuous {
  assign w := (x == 0) || (x == 1);
}
process 1 {
  if (w) {
    out <= x * 2;
  } else {
    out = {x, w}[1:0];
  }
}
";
        // `ct_is_on` is undeclared on purpose; parsing is independent of validation.
        let (p, a) = parse_ir_text(text).unwrap();
        let emitted = program_to_text(&p, &a);
        let (p2, a2) = parse_ir_text(&emitted).unwrap();
        assert_eq!(p, p2);
        assert_eq!(a, a2);
        assert_eq!(emitted, program_to_text(&p2, &a2));
    }

    #[test]
    fn parses_formulas() {
        let f = parse_formula("x && ct = 1 && L a = b").unwrap();
        assert_eq!(f.atoms.len(), 3);
        assert_eq!(f.atoms[0], FormulaAtom::EqLR("x".into()));
        assert_eq!(f.atoms[1], FormulaAtom::EqConst(Side::Both, "ct".into(), 1));
        assert_eq!(
            f.atoms[2],
            FormulaAtom::EqVars(Side::Left, "a".into(), "b".into())
        );
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_ir_text("process { }").is_err());
        assert!(parse_ir_text("reg x 1;").is_err());
        assert!(parse_formula("x + 1").is_err());
    }
}
