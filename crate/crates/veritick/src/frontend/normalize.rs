//! Normalization: module inlining, case desugaring, and edge collapsing.
//!
//! The result is a single flat module whose only items are always blocks and
//! continuous assignments, with `case` rewritten to if/else chains. Clock
//! edge polarity carries no meaning afterwards; both edges behave as the one
//! implicit clock.

use std::collections::BTreeMap;

use super::ast::*;
use super::FrontendError;
use crate::ir::{sym, Expression};

/// Inlines every module instance reachable from `top` and desugars the
/// result. Instantiated modules must be non-parameterized and the instance
/// graph acyclic.
pub fn normalize(
    asts: &[VerilogModuleAst],
    top: &str,
) -> Result<VerilogModuleAst, FrontendError> {
    let mut by_name: BTreeMap<&str, &VerilogModuleAst> = BTreeMap::new();
    for m in asts {
        if by_name.insert(&m.name, m).is_some() {
            return Err(FrontendError::DuplicateModule {
                name: m.name.clone(),
            });
        }
    }
    let Some(top_ast) = by_name.get(top) else {
        return Err(FrontendError::UnknownModule {
            name: top.to_string(),
        });
    };
    let mut stack = vec![top.to_string()];
    let mut flat = flatten(top_ast, &by_name, &mut stack)?;
    for item in &mut flat.items {
        if let ModuleItem::AlwaysBlock { body, .. } = item {
            *body = desugar_stmt(body.clone());
        }
    }
    Ok(flat)
}

/// Returns a copy of `m` with every instance replaced by the instantiated
/// module's internals: port names substituted by the connected identifiers
/// and internal names fresh under an `<instance>$` prefix.
fn flatten(
    m: &VerilogModuleAst,
    by_name: &BTreeMap<&str, &VerilogModuleAst>,
    stack: &mut Vec<String>,
) -> Result<VerilogModuleAst, FrontendError> {
    let mut out = m.clone();
    let items = std::mem::take(&mut out.items);
    for item in items {
        match item {
            ModuleItem::ModuleInstance {
                module,
                instance,
                connections,
                span,
            } => {
                if stack.contains(&module) {
                    let mut chain = stack.clone();
                    chain.push(module.clone());
                    return Err(FrontendError::CyclicInstantiation { chain });
                }
                let Some(sub) = by_name.get(module.as_str()) else {
                    return Err(FrontendError::UnknownModule {
                        name: module.clone(),
                    });
                };
                stack.push(module.clone());
                let sub_flat = flatten(sub, by_name, stack)?;
                stack.pop();

                let mut rename: BTreeMap<String, String> = BTreeMap::new();
                for (idx, conn) in connections.iter().enumerate() {
                    let (formal, actual) = match conn {
                        PortConnection::Named { formal, actual } => (formal.clone(), actual),
                        PortConnection::Positional { actual } => {
                            let Some(port) = sub_flat.ports.get(idx) else {
                                return Err(FrontendError::Unsupported {
                                    span,
                                    message: format!(
                                        "instance `{instance}` has more connections than `{module}` has ports"
                                    ),
                                });
                            };
                            (port.name.clone(), actual)
                        }
                    };
                    rename.insert(formal, actual.clone());
                }
                let prefix = format!("{instance}$");
                let map = |name: &str| -> String {
                    rename
                        .get(name)
                        .cloned()
                        .unwrap_or_else(|| format!("{prefix}{name}"))
                };

                for d in &sub_flat.declarations {
                    // Declarations shadowing a connected port belong to the
                    // port and are dropped; unconnected internals get the
                    // instance prefix.
                    if rename.contains_key(&d.name) {
                        continue;
                    }
                    out.declarations.push(Declaration {
                        kind: d.kind,
                        width: d.width,
                        name: map(&d.name),
                        span: d.span,
                    });
                }
                for p in &sub_flat.ports {
                    if rename.contains_key(&p.name) {
                        continue;
                    }
                    // An unconnected port becomes an internal variable.
                    out.declarations.push(Declaration {
                        kind: if p.is_reg { DeclKind::Reg } else { DeclKind::Wire },
                        width: p.width,
                        name: map(&p.name),
                        span: p.span,
                    });
                }
                for sub_item in &sub_flat.items {
                    out.items.push(rename_item(sub_item, &map));
                }
            }
            other => out.items.push(other),
        }
    }
    Ok(out)
}

fn rename_item(item: &ModuleItem, map: &impl Fn(&str) -> String) -> ModuleItem {
    match item {
        ModuleItem::AlwaysBlock {
            sensitivity,
            body,
            span,
        } => ModuleItem::AlwaysBlock {
            sensitivity: *sensitivity,
            body: rename_stmt(body, map),
            span: *span,
        },
        ModuleItem::ContinuousAssignItem { lhs, rhs, span } => ModuleItem::ContinuousAssignItem {
            lhs: map(lhs),
            rhs: rhs.rename_vars(map),
            span: *span,
        },
        ModuleItem::ModuleInstance { .. } => {
            unreachable!("instances are gone after recursive flattening")
        }
    }
}

fn rename_stmt(s: &VerilogStmt, map: &impl Fn(&str) -> String) -> VerilogStmt {
    match s {
        VerilogStmt::Block(items) => {
            VerilogStmt::Block(items.iter().map(|i| rename_stmt(i, map)).collect())
        }
        VerilogStmt::If {
            cond,
            then_branch,
            else_branch,
        } => VerilogStmt::If {
            cond: cond.rename_vars(map),
            then_branch: Box::new(rename_stmt(then_branch, map)),
            else_branch: else_branch.as_ref().map(|e| Box::new(rename_stmt(e, map))),
        },
        VerilogStmt::Case {
            scrutinee,
            arms,
            default,
        } => VerilogStmt::Case {
            scrutinee: scrutinee.rename_vars(map),
            arms: arms
                .iter()
                .map(|(labels, stmt)| (labels.clone(), rename_stmt(stmt, map)))
                .collect(),
            default: default.as_ref().map(|d| Box::new(rename_stmt(d, map))),
        },
        VerilogStmt::Blocking { lhs, rhs, span } => VerilogStmt::Blocking {
            lhs: map(lhs),
            rhs: rhs.rename_vars(map),
            span: *span,
        },
        VerilogStmt::NonBlocking { lhs, rhs, span } => VerilogStmt::NonBlocking {
            lhs: map(lhs),
            rhs: rhs.rename_vars(map),
            span: *span,
        },
    }
}

/// Rewrites `case` into an if/else chain of equality tests against the
/// labels; a missing default arm falls through to no-op.
fn desugar_stmt(s: VerilogStmt) -> VerilogStmt {
    match s {
        VerilogStmt::Block(items) => {
            VerilogStmt::Block(items.into_iter().map(desugar_stmt).collect())
        }
        VerilogStmt::If {
            cond,
            then_branch,
            else_branch,
        } => VerilogStmt::If {
            cond,
            then_branch: Box::new(desugar_stmt(*then_branch)),
            else_branch: else_branch.map(|e| Box::new(desugar_stmt(*e))),
        },
        VerilogStmt::Case {
            scrutinee,
            arms,
            default,
        } => {
            let mut out = default.map(|d| desugar_stmt(*d));
            for (labels, stmt) in arms.into_iter().rev() {
                let mut cond: Option<Expression> = None;
                for label in labels {
                    let test = Expression::app(sym::EQ, vec![scrutinee.clone(), label]);
                    cond = Some(match cond {
                        None => test,
                        Some(c) => Expression::app(sym::LOG_OR, vec![c, test]),
                    });
                }
                let cond = cond.expect("case arm with no labels");
                out = Some(VerilogStmt::If {
                    cond,
                    then_branch: Box::new(desugar_stmt(stmt)),
                    else_branch: out.map(Box::new),
                });
            }
            out.unwrap_or(VerilogStmt::Block(vec![]))
        }
        other => other,
    }
}
