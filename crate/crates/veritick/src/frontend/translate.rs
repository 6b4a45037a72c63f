//! Translation from a flat Verilog module to the intermediate representation.
//!
//! Every always block becomes one sequential process, every assign item one
//! continuous process, each with a fresh id in source order. A port named
//! `clk` (or `clock`) is the implicit clock and does not become a variable.

use std::collections::BTreeMap;

use super::ast::*;
use super::FrontendError;
use crate::ir::{
    AnnotationSet, Formula, FormulaAtom, Process, ProcessKind, Program, Side, Statement,
    StorageClass, VarInfo,
};

fn is_clock_name(name: &str) -> bool {
    name == "clk" || name == "clock"
}

/// Translates a normalized (instance-free, case-free) module.
pub fn translate(flat: &VerilogModuleAst) -> Result<(Program, AnnotationSet), FrontendError> {
    let mut vars: BTreeMap<String, VarInfo> = BTreeMap::new();
    let mut insert = |name: &str, class: StorageClass, width: u8, span: SourceSpan| {
        match vars.get_mut(name) {
            None => {
                vars.insert(
                    name.to_string(),
                    VarInfo {
                        name: name.to_string(),
                        class,
                        width,
                    },
                );
                Ok(())
            }
            Some(existing) if existing.width == width => {
                // Old-style `output out; reg out;` pairs meet here; the
                // register declaration decides the storage class.
                if class == StorageClass::Register {
                    existing.class = StorageClass::Register;
                }
                Ok(())
            }
            Some(_) => Err(FrontendError::Unsupported {
                span,
                message: format!("`{name}` declared twice with different widths"),
            }),
        }
    };

    for p in &flat.ports {
        if is_clock_name(&p.name) {
            continue;
        }
        let class = match (p.direction, p.is_reg) {
            (_, true) => StorageClass::Register,
            // Inputs are registers driven by the environment.
            (PortDirection::Input, false) => StorageClass::Register,
            (PortDirection::Output, false) => StorageClass::Wire,
        };
        insert(&p.name, class, p.width, p.span)?;
    }
    for d in &flat.declarations {
        if is_clock_name(&d.name) {
            continue;
        }
        let class = match d.kind {
            DeclKind::Reg => StorageClass::Register,
            DeclKind::Wire => StorageClass::Wire,
        };
        insert(&d.name, class, d.width, d.span)?;
    }

    let mut processes = Vec::new();
    for (idx, item) in flat.items.iter().enumerate() {
        let id = idx as u32;
        match item {
            ModuleItem::AlwaysBlock { body, .. } => {
                processes.push(Process {
                    id,
                    kind: ProcessKind::Sequential,
                    body: translate_stmt(body)?.normalize(),
                });
            }
            ModuleItem::ContinuousAssignItem { lhs, rhs, .. } => {
                processes.push(Process {
                    id,
                    kind: ProcessKind::Continuous,
                    body: Statement::ContinuousAssign {
                        lhs: lhs.clone(),
                        rhs: rhs.clone(),
                    },
                });
            }
            ModuleItem::ModuleInstance { span, module, .. } => {
                return Err(FrontendError::Unsupported {
                    span: *span,
                    message: format!("instance of `{module}` must be inlined before translation"),
                });
            }
        }
    }

    let a = &flat.annotations;
    let mut annots = AnnotationSet {
        sources: a.sources.iter().cloned().collect(),
        sinks: a.sinks.iter().cloned().collect(),
        initial_eq: a
            .init_eq
            .iter()
            .map(|x| Formula {
                atoms: vec![FormulaAtom::EqLR(x.clone())],
            })
            .collect(),
        always_eq: a
            .always_eq
            .iter()
            .map(|x| Formula {
                atoms: vec![FormulaAtom::EqLR(x.clone())],
            })
            .collect(),
    };
    for (x, c) in &a.assumes {
        annots.always_eq.push(Formula {
            atoms: vec![FormulaAtom::EqConst(Side::Both, x.clone(), *c)],
        });
    }

    Ok((Program { processes, vars }, annots))
}

fn translate_stmt(s: &VerilogStmt) -> Result<Statement, FrontendError> {
    Ok(match s {
        VerilogStmt::Block(items) => Statement::Sequence(
            items
                .iter()
                .map(translate_stmt)
                .collect::<Result<_, _>>()?,
        ),
        VerilogStmt::If {
            cond,
            then_branch,
            else_branch,
        } => Statement::IfThenElse {
            cond: cond.clone(),
            then_branch: Box::new(translate_stmt(then_branch)?),
            else_branch: Box::new(match else_branch {
                Some(e) => translate_stmt(e)?,
                None => Statement::Skip,
            }),
        },
        VerilogStmt::Case { .. } => {
            unreachable!("case statements are desugared during normalization")
        }
        VerilogStmt::Blocking { lhs, rhs, .. } => Statement::BlockingAssign {
            lhs: lhs.clone(),
            rhs: rhs.clone(),
        },
        VerilogStmt::NonBlocking { lhs, rhs, .. } => Statement::NonBlockingAssign {
            lhs: lhs.clone(),
            rhs: rhs.clone(),
        },
    })
}
