//! Static check that `pure` methods cannot change the heap or produce output.

use std::collections::HashSet;

use crate::ast::*;
use crate::error::PurityDiagnostic;

/// Sequence methods that modify their receiver.
pub const SEQ_MUTATORS: &[&str] = &["add", "removeLast", "set"];
/// Sequence methods that only read.
pub const SEQ_READERS: &[&str] = &["size", "last", "get"];

/// Checks every `pure` method. Calls are resolved conservatively: a call to
/// `m` is allowed only if every class method named `m` is pure, since the
/// receiver's class is not known statically.
pub fn check_purity(p: &Program) -> Vec<PurityDiagnostic> {
    let impure: HashSet<&str> = p
        .classes
        .iter()
        .flat_map(|c| c.methods.iter())
        .filter(|m| !m.pure)
        .map(|m| m.name.as_str())
        .collect();
    let mut out = Vec::new();
    for c in &p.classes {
        if let Some(init) = c.constructor.as_ref().filter(|m| m.pure) {
            out.push(PurityDiagnostic {
                message: "constructor cannot be pure".into(),
                class: c.name.clone(),
                method: "init".into(),
                line: init.line,
            });
        }
        for m in c.methods.iter().filter(|m| m.pure) {
            let mut cx = Checker {
                impure: &impure,
                locals: m.params.iter().cloned().collect(),
                class: &c.name,
                method: &m.name,
                out: &mut out,
            };
            cx.block(&m.body);
        }
    }
    out
}

struct Checker<'a> {
    impure: &'a HashSet<&'a str>,
    locals: HashSet<String>,
    class: &'a str,
    method: &'a str,
    out: &'a mut Vec<PurityDiagnostic>,
}

impl Checker<'_> {
    fn report(&mut self, message: &str, line: u32) {
        self.out.push(PurityDiagnostic {
            message: message.into(),
            class: self.class.into(),
            method: self.method.into(),
            line,
        });
    }

    fn block(&mut self, stmts: &[Stmt]) {
        for s in stmts {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::VarDecl { name, init } => {
                self.expr(init);
                self.locals.insert(name.clone());
            }
            StmtKind::Assign { name, value } => {
                if !self.locals.contains(name) {
                    self.report("field assignment in pure method", s.line);
                }
                self.expr(value);
            }
            StmtKind::FieldAssign { target, value, .. } => {
                self.report("field assignment in pure method", s.line);
                self.expr(target);
                self.expr(value);
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                self.expr(cond);
                self.block(then_body);
                self.block(else_body);
            }
            StmtKind::While { cond, body } => {
                self.expr(cond);
                self.block(body);
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    self.expr(e);
                }
            }
            StmtKind::Expr(e) => self.expr(e),
        }
    }

    fn call_target(&mut self, method: &str, line: u32) {
        if self.impure.contains(method) {
            self.report("pure calls non-pure", line);
        }
    }

    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Call { method, args } => {
                match method.as_str() {
                    "print" => self.report("print in pure method", e.line),
                    "seq" => self.report("allocation in pure method", e.line),
                    "abort" => {}
                    m => self.call_target(m, e.line),
                }
                args.iter().for_each(|a| self.expr(a));
            }
            ExprKind::MethodCall {
                receiver,
                method,
                args,
            } => {
                if SEQ_MUTATORS.contains(&method.as_str()) {
                    self.report("mutating call in pure method", e.line);
                } else {
                    self.call_target(method, e.line);
                }
                self.expr(receiver);
                args.iter().for_each(|a| self.expr(a));
            }
            ExprKind::New { args, .. } => {
                self.report("allocation in pure method", e.line);
                args.iter().for_each(|a| self.expr(a));
            }
            ExprKind::Field { receiver, .. } => self.expr(receiver),
            ExprKind::Unary { operand, .. } => self.expr(operand),
            ExprKind::Binary { left, right, .. } => {
                self.expr(left);
                self.expr(right);
            }
            ExprKind::Int(_)
            | ExprKind::Real(_)
            | ExprKind::Str(_)
            | ExprKind::Bool(_)
            | ExprKind::Null
            | ExprKind::SelfRef
            | ExprKind::Name(_) => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_program;

    fn diags(src: &str) -> Vec<String> {
        check_purity(&parse_program(src).unwrap())
            .into_iter()
            .map(|d| d.message)
            .collect()
    }

    #[test]
    fn reads_are_pure() {
        assert!(diags(
            "class S { var v; pure def size() { return v.size(); }
               pure def top() { var n = v.size(); n = n - 1; return v.get(n); } }
             main {}"
        )
        .is_empty());
    }

    #[test]
    fn violations() {
        assert_eq!(
            diags("class S { var v; pure def bad() { v.add(1); return 0; } } main {}"),
            ["mutating call in pure method"]
        );
        assert_eq!(
            diags("class S { pure def f() { return g(); } def g() { return 1; } } main {}"),
            ["pure calls non-pure"]
        );
        assert_eq!(
            diags("class S { var c; pure def f() { c = 1; self.c = 2; } } main {}"),
            [
                "field assignment in pure method",
                "field assignment in pure method"
            ]
        );
        assert_eq!(
            diags("class S { pure def f() { print(1); var s = seq(); var o = new S(); } } main {}"),
            [
                "print in pure method",
                "allocation in pure method",
                "allocation in pure method"
            ]
        );
    }

    #[test]
    fn any_impure_override_taints_the_name() {
        assert_eq!(
            diags(
                "class A { pure def m() { return 1; } pure def f() { return self.m(); } }
                 class B extends A { def m() { return 2; } } main {}"
            ),
            ["pure calls non-pure"]
        );
    }
}
