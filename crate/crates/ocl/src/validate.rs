//! Static placement rules for `result`, `@pre` and parameter references.

use crate::ast::{Clause, ClauseKind, ContextDecl, Expr, ExprKind};
use crate::error::Diagnostic;

/// Checks one clause against its declaring context. An empty list means the
/// clause is acceptable; every problem found is reported, not just the first.
pub fn validate_clause(clause: &Clause, context: &ContextDecl) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    match (clause.kind, context.method.is_some()) {
        (ClauseKind::Inv, true) => diags.push(Diagnostic::new(
            format!(
                "inv clause requires a class context, not `{}`",
                context.key()
            ),
            clause.origin,
        )),
        (ClauseKind::Pre | ClauseKind::Post, false) => diags.push(Diagnostic::new(
            format!("{} clause requires a method context", clause.kind),
            clause.origin,
        )),
        _ => {}
    }
    let params: Vec<&str> = context.param_names().collect();
    let mut checker = Checker {
        kind: clause.kind,
        params: &params,
        binders: Vec::new(),
        diags: &mut diags,
    };
    checker.visit(&clause.expr);
    diags
}

struct Checker<'a> {
    kind: ClauseKind,
    params: &'a [&'a str],
    binders: Vec<String>,
    diags: &'a mut Vec<Diagnostic>,
}

impl Checker<'_> {
    fn visit(&mut self, e: &Expr) {
        if self.kind == ClauseKind::Post && e.spine_has_at_pre() {
            self.check_capture_chain(e);
        }
        match &e.kind {
            ExprKind::ResultRef if self.kind != ClauseKind::Post => {
                self.diags.push(Diagnostic::new(
                    format!("result not allowed in {}", self.kind),
                    e.span,
                ));
            }
            ExprKind::AtPre(_) if self.kind != ClauseKind::Post => {
                self.diags.push(Diagnostic::new(
                    format!("@pre not allowed in {}", self.kind),
                    e.span,
                ));
            }
            ExprKind::Ident(name)
                if !self.binders.iter().any(|b| b == name)
                    && !self.params.contains(&name.as_str()) =>
            {
                self.diags.push(Diagnostic::new(
                    format!("unknown parameter `{name}`"),
                    e.span,
                ));
            }
            _ => {}
        }
        if let ExprKind::Collection {
            receiver,
            binder: Some(binder),
            args,
            ..
        } = &e.kind
        {
            self.visit(receiver);
            self.binders.push(binder.clone());
            for a in args {
                self.visit(a);
            }
            self.binders.pop();
            return;
        }
        for child in e.children() {
            self.visit(child);
        }
    }

    /// A captured chain is evaluated at method entry, so it cannot depend on
    /// `result` or on iterator variables bound around it.
    fn check_capture_chain(&mut self, chain: &Expr) {
        if chain.contains_result() {
            self.diags.push(Diagnostic::new(
                "@pre chain cannot reference result",
                chain.span,
            ));
        }
        let mut inner_binders = Vec::new();
        collect_binders(chain, &mut inner_binders);
        let mut seen = Vec::new();
        chain.walk(&mut |n| {
            if let ExprKind::Ident(name) = &n.kind {
                if self.binders.contains(name)
                    && !inner_binders.contains(name)
                    && !seen.contains(name)
                {
                    seen.push(name.clone());
                }
            }
        });
        for name in seen {
            self.diags.push(Diagnostic::new(
                format!("@pre chain cannot reference iterator variable `{name}`"),
                chain.span,
            ));
        }
    }
}

fn collect_binders(e: &Expr, out: &mut Vec<String>) {
    e.walk(&mut |n| {
        if let ExprKind::Collection {
            binder: Some(b), ..
        } = &n.kind
        {
            out.push(b.clone());
        }
    });
}
