//! Precedence-aware printing. Parentheses appear only where reparsing would
//! otherwise build a different tree.

use crate::ast::{Expr, ExprKind, UnaryOp, POSTFIX_PRECEDENCE, UNARY_PRECEDENCE};
use crate::lexer::quote;

pub fn format_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, &mut out);
    out
}

fn write_expr(e: &Expr, out: &mut String) {
    match &e.kind {
        ExprKind::Int(v) => out.push_str(&v.to_string()),
        ExprKind::Real(v) => out.push_str(&format!("{v:?}")),
        ExprKind::Str(s) => out.push_str(&quote(s)),
        ExprKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::SelfRef => out.push_str("self"),
        ExprKind::ResultRef => out.push_str("result"),
        ExprKind::Ident(name) => out.push_str(name),
        ExprKind::Call {
            receiver,
            method,
            args,
        } => write_call(receiver.as_deref(), method, args, false, out),
        ExprKind::Field { receiver, field } => {
            write_receiver(receiver, out);
            out.push('.');
            out.push_str(field);
        }
        ExprKind::AtPre(inner) => match &inner.kind {
            ExprKind::Call {
                receiver,
                method,
                args,
            } => write_call(receiver.as_deref(), method, args, true, out),
            _ => {
                write_expr(inner, out);
                out.push_str("@pre");
            }
        },
        ExprKind::Unary { op, operand } => {
            let mut inner = String::new();
            write_operand(operand, UNARY_PRECEDENCE, false, &mut inner);
            match op {
                UnaryOp::Not => {
                    out.push_str("not ");
                }
                UnaryOp::Negate => {
                    out.push('-');
                    // `--` would start a comment
                    if inner.starts_with('-') {
                        out.push(' ');
                    }
                }
            }
            out.push_str(&inner);
        }
        ExprKind::Binary { op, left, right } => {
            let p = op.precedence();
            write_operand(left, p, op.is_relational(), out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_operand(right, p, true, out);
        }
        ExprKind::Collection {
            receiver,
            op,
            binder,
            args,
        } => {
            write_receiver(receiver, out);
            out.push_str("->");
            out.push_str(op.name());
            out.push('(');
            if let Some(b) = binder {
                out.push_str(b);
                out.push_str(" | ");
            }
            write_list(args, out);
            out.push(')');
        }
    }
}

/// Parenthesizes `e` when it binds looser than `min`, or exactly as loose
/// when `strict` is set.
fn write_operand(e: &Expr, min: u8, strict: bool, out: &mut String) {
    let p = e.precedence();
    if p < min || (strict && p == min) {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}

fn write_receiver(e: &Expr, out: &mut String) {
    write_operand(e, POSTFIX_PRECEDENCE, false, out);
}

fn write_call(
    receiver: Option<&Expr>,
    method: &str,
    args: &[Expr],
    at_pre: bool,
    out: &mut String,
) {
    if let Some(r) = receiver {
        write_receiver(r, out);
        out.push('.');
    }
    out.push_str(method);
    if at_pre {
        out.push_str("@pre");
    }
    out.push('(');
    write_list(args, out);
    out.push(')');
}

fn write_list(args: &[Expr], out: &mut String) {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(a, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::BinaryOp;
    use crate::parser::parse_expression;

    fn ident(n: &str) -> Expr {
        Expr::synth(ExprKind::Ident(n.into()))
    }

    fn bin(op: BinaryOp, l: Expr, r: Expr) -> Expr {
        Expr::synth(ExprKind::Binary {
            op,
            left: Box::new(l),
            right: Box::new(r),
        })
    }

    #[test]
    fn minimal_parentheses() {
        let e = bin(
            BinaryOp::Or,
            ident("a"),
            bin(BinaryOp::And, ident("b"), ident("c")),
        );
        assert_eq!(format_expr(&e), "a or b and c");
        let e = bin(
            BinaryOp::And,
            ident("a"),
            bin(BinaryOp::Or, ident("b"), ident("c")),
        );
        assert_eq!(format_expr(&e), "a and (b or c)");
    }

    #[test]
    fn stack_contract_examples() {
        let e = Expr::synth(ExprKind::Unary {
            op: UnaryOp::Not,
            operand: Box::new(Expr::synth(ExprKind::Call {
                receiver: None,
                method: "empty".into(),
                args: vec![],
            })),
        });
        assert_eq!(format_expr(&e), "not empty()");
        assert_eq!(format_expr(&Expr::synth(ExprKind::Int(0))), "0");
    }

    #[test]
    fn canonical_forms() {
        for (src, want) in [
            ("size()  >=0", "size() >= 0"),
            ("((a))", "a"),
            ("a - (b - c)", "a - (b - c)"),
            ("(a - b) - c", "a - b - c"),
            ("(a < b) = c", "(a < b) = c"),
            ("a = (b < c)", "a = (b < c)"),
            ("- - 1", "- -1"),
            ("-(1 + 2)", "-(1 + 2)"),
            ("not (a = b)", "not (a = b)"),
            ("(not a) = b", "not a = b"),
            ("(a + b).foo()", "(a + b).foo()"),
            ("size()@pre", "size@pre()"),
            ("self.v@pre", "self.v@pre"),
            ("x->forAll(e|e>0)", "x->forAll(e | e > 0)"),
            ("1.0 / 4", "1.0 / 4"),
            ("'it\\'s'", "'it\\'s'"),
        ] {
            assert_eq!(format_expr(&parse_expression(src).unwrap()), want, "{src}");
        }
    }

    #[test]
    fn reals_keep_their_type() {
        let e = parse_expression("2.0").unwrap();
        let printed = format_expr(&e);
        assert_eq!(parse_expression(&printed).unwrap(), e);
        let e = Expr::synth(ExprKind::Real(1e-7));
        assert_eq!(parse_expression(&format_expr(&e)).unwrap(), e);
    }
}
