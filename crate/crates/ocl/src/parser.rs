//! Recursive-descent parser for constraint files and expressions.
//!
//! Precedence, lowest first: `implies`, `xor`, `or`, `and`, relational
//! (non-associative), additive, multiplicative, unary, postfix.

use crate::ast::*;
use crate::error::OclError;
use crate::lexer::{tokenize, unquote, Token, TokenKind};
use crate::span::SourceSpan;
use crate::validate::validate_clause;

/// Parses a single standalone expression.
pub fn parse_expression(source: &str) -> Result<Expr, OclError> {
    let mut p = Parser::new(source)?;
    let e = p.expression()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parses and validates a whole constraint file.
pub fn parse_constraint_file(source: &str) -> Result<ConstraintFile, OclError> {
    parse_constraint_file_named(source, "<input>")
}

pub fn parse_constraint_file_named(
    source: &str,
    source_name: &str,
) -> Result<ConstraintFile, OclError> {
    let mut p = Parser::new(source)?;
    let mut decls = Vec::new();
    while !p.at_eof() {
        decls.push(p.context_decl()?);
    }
    if decls.is_empty() {
        return Err(OclError::Empty);
    }
    let diagnostics: Vec<_> = decls
        .iter()
        .flat_map(|d| d.clauses.iter().flat_map(move |c| validate_clause(c, d)))
        .collect();
    if !diagnostics.is_empty() {
        return Err(OclError::Invalid(diagnostics));
    }
    Ok(ConstraintFile {
        decls,
        source_name: source_name.to_string(),
    })
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    last_end: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, OclError> {
        Ok(Parser {
            src,
            tokens: tokenize(src)?,
            pos: 0,
            last_end: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
            self.last_end = t.end_offset();
        }
        t
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, OclError> {
        let t = self.peek();
        let what = if t.kind == TokenKind::Eof {
            "end of input".to_string()
        } else {
            format!("`{}`", t.text)
        };
        Err(OclError::Syntax {
            message: format!("{}, found {}", message.into(), what),
            span: t.span,
        })
    }

    fn expect_eof(&self) -> Result<(), OclError> {
        if self.at_eof() {
            Ok(())
        } else {
            self.error("expected end of expression")
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<Token, OclError> {
        if self.peek().is_punct(p) {
            Ok(self.advance())
        } else {
            self.error(format!("expected `{p}`"))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<Token, OclError> {
        if self.peek().kind == TokenKind::Ident {
            Ok(self.advance())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    /// Span running from `start` through the most recently consumed token.
    fn span_from(&self, start: &Token) -> SourceSpan {
        let end = self.last_end.max(start.end_offset());
        SourceSpan::new(
            start.span.line,
            start.span.column,
            self.src[start.offset..end].chars().count() as u32,
        )
    }

    fn context_decl(&mut self) -> Result<ContextDecl, OclError> {
        let start = self.peek().clone();
        if !start.is_keyword("context") {
            return self.error("expected `context`");
        }
        self.advance();
        let class_name = self.expect_ident("class name")?.text;
        let method = if self.peek().is_punct("::") {
            self.advance();
            Some(self.method_sig()?)
        } else {
            None
        };
        let mut clauses = Vec::new();
        while ["inv", "pre", "post"]
            .iter()
            .any(|k| self.peek().is_keyword(k))
        {
            clauses.push(self.clause()?);
        }
        if clauses.is_empty() {
            return self.error("expected `inv`, `pre` or `post` clause");
        }
        if !self.at_eof() && !self.peek().is_keyword("context") {
            return self.error("expected clause or `context`");
        }
        Ok(ContextDecl {
            class_name,
            method,
            clauses,
            span: self.span_from(&start),
        })
    }

    fn method_sig(&mut self) -> Result<MethodSig, OclError> {
        let name = self.expect_ident("method name")?.text;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.peek().is_punct(")") {
            loop {
                let pname = self.expect_ident("parameter name")?.text;
                self.expect_punct(":")?;
                let type_name = self.expect_ident("type name")?.text;
                params.push(Param {
                    name: pname,
                    type_name,
                });
                if self.peek().is_punct(",") {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        let return_type = if self.peek().is_punct(":") {
            self.advance();
            Some(self.expect_ident("return type")?.text)
        } else {
            None
        };
        Ok(MethodSig {
            name,
            params,
            return_type,
        })
    }

    fn clause(&mut self) -> Result<Clause, OclError> {
        let start = self.advance();
        let kind = match start.text.as_str() {
            "inv" => ClauseKind::Inv,
            "pre" => ClauseKind::Pre,
            _ => ClauseKind::Post,
        };
        let label = if self.peek().kind == TokenKind::Ident {
            Some(self.advance().text)
        } else {
            None
        };
        self.expect_punct(":")?;
        let expr = self.expression()?;
        Ok(Clause {
            kind,
            label,
            expr,
            origin: self.span_from(&start),
        })
    }

    fn expression(&mut self) -> Result<Expr, OclError> {
        self.binary_level(1)
    }

    fn binary_op_at(&self, level: u8) -> Option<BinaryOp> {
        let t = self.peek();
        let op = match (t.kind, t.text.as_str()) {
            (TokenKind::Keyword, "implies") => BinaryOp::Implies,
            (TokenKind::Keyword, "xor") => BinaryOp::Xor,
            (TokenKind::Keyword, "or") => BinaryOp::Or,
            (TokenKind::Keyword, "and") => BinaryOp::And,
            (TokenKind::Operator, "=") => BinaryOp::Eq,
            (TokenKind::Operator, "<>") => BinaryOp::Ne,
            (TokenKind::Operator, "<") => BinaryOp::Lt,
            (TokenKind::Operator, "<=") => BinaryOp::Le,
            (TokenKind::Operator, ">") => BinaryOp::Gt,
            (TokenKind::Operator, ">=") => BinaryOp::Ge,
            (TokenKind::Operator, "+") => BinaryOp::Add,
            (TokenKind::Operator, "-") => BinaryOp::Sub,
            (TokenKind::Operator, "*") => BinaryOp::Mul,
            (TokenKind::Operator, "/") => BinaryOp::Div,
            _ => return None,
        };
        (op.precedence() == level).then_some(op)
    }

    fn binary_level(&mut self, level: u8) -> Result<Expr, OclError> {
        if level > 7 {
            return self.unary();
        }
        let start = self.peek().clone();
        let mut left = self.binary_level(level + 1)?;
        if level == 5 {
            if let Some(op) = self.binary_op_at(5) {
                self.advance();
                let right = self.binary_level(6)?;
                left = Expr::new(
                    ExprKind::Binary {
                        op,
                        left: Box::new(left),
                        right: Box::new(right),
                    },
                    self.span_from(&start),
                );
                if self.binary_op_at(5).is_some() {
                    return self.error("relational operators do not chain; add parentheses");
                }
            }
            return Ok(left);
        }
        while let Some(op) = self.binary_op_at(level) {
            self.advance();
            let right = self.binary_level(level + 1)?;
            left = Expr::new(
                ExprKind::Binary {
                    op,
                    left: Box::new(left),
                    right: Box::new(right),
                },
                self.span_from(&start),
            );
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Expr, OclError> {
        let start = self.peek().clone();
        let op = if start.is_keyword("not") {
            UnaryOp::Not
        } else if start.is_op("-") {
            UnaryOp::Negate
        } else {
            return self.postfix();
        };
        self.advance();
        let operand = self.unary()?;
        Ok(Expr::new(
            ExprKind::Unary {
                op,
                operand: Box::new(operand),
            },
            self.span_from(&start),
        ))
    }

    fn postfix(&mut self) -> Result<Expr, OclError> {
        let start = self.peek().clone();
        let mut expr = self.primary()?;
        loop {
            let t = self.peek().clone();
            if t.is_punct(".") {
                self.advance();
                let name = self.expect_ident("member name after `.`")?.text;
                let at_pre = self.eat_at_pre();
                expr = if self.peek().is_punct("(") {
                    let args = self.call_args()?;
                    Expr::new(
                        ExprKind::Call {
                            receiver: Some(Box::new(expr)),
                            method: name,
                            args,
                        },
                        self.span_from(&start),
                    )
                } else {
                    Expr::new(
                        ExprKind::Field {
                            receiver: Box::new(expr),
                            field: name,
                        },
                        self.span_from(&start),
                    )
                };
                if let Some(marker) = at_pre {
                    expr = self.wrap_at_pre(expr, &start, &marker)?;
                }
            } else if t.is_op("->") {
                self.advance();
                expr = self.collection_op(expr, &start)?;
            } else if t.kind == TokenKind::AtPre {
                self.advance();
                expr = self.wrap_at_pre(expr, &start, &t)?;
            } else {
                return Ok(expr);
            }
        }
    }

    fn eat_at_pre(&mut self) -> Option<Token> {
        (self.peek().kind == TokenKind::AtPre).then(|| self.advance())
    }

    fn wrap_at_pre(&self, inner: Expr, start: &Token, marker: &Token) -> Result<Expr, OclError> {
        let allowed = matches!(
            inner.kind,
            ExprKind::Ident(_) | ExprKind::Field { .. } | ExprKind::Call { .. }
        );
        if !allowed {
            return Err(OclError::Syntax {
                message: "`@pre` must follow a name, attribute or method call".into(),
                span: marker.span,
            });
        }
        if inner.contains_at_pre() {
            return Err(OclError::Syntax {
                message: "`@pre` cannot be nested inside another `@pre`".into(),
                span: marker.span,
            });
        }
        Ok(Expr::new(
            ExprKind::AtPre(Box::new(inner)),
            self.span_from(start),
        ))
    }

    fn collection_op(&mut self, receiver: Expr, start: &Token) -> Result<Expr, OclError> {
        let name_tok = self.expect_ident("collection operation after `->`")?;
        let Some(op) = CollectionOp::from_name(&name_tok.text) else {
            return Err(OclError::Syntax {
                message: format!("unknown collection operation `{}`", name_tok.text),
                span: name_tok.span,
            });
        };
        self.expect_punct("(")?;
        let (binder, args) = if op.is_quantifier() {
            let binder = self.expect_ident("iterator variable")?.text;
            self.expect_punct("|")?;
            let body = self.expression()?;
            (Some(binder), vec![body])
        } else {
            let mut args = Vec::new();
            if !self.peek().is_punct(")") {
                args.push(self.expression()?);
                while self.peek().is_punct(",") {
                    self.advance();
                    args.push(self.expression()?);
                }
            }
            if args.len() != op.arity() {
                return Err(OclError::Syntax {
                    message: format!(
                        "`->{}` takes {} argument(s), got {}",
                        op.name(),
                        op.arity(),
                        args.len()
                    ),
                    span: name_tok.span,
                });
            }
            (None, args)
        };
        self.expect_punct(")")?;
        Ok(Expr::new(
            ExprKind::Collection {
                receiver: Box::new(receiver),
                op,
                binder,
                args,
            },
            self.span_from(start),
        ))
    }

    fn call_args(&mut self) -> Result<Vec<Expr>, OclError> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if !self.peek().is_punct(")") {
            args.push(self.expression()?);
            while self.peek().is_punct(",") {
                self.advance();
                args.push(self.expression()?);
            }
        }
        self.expect_punct(")")?;
        Ok(args)
    }

    fn primary(&mut self) -> Result<Expr, OclError> {
        let t = self.peek().clone();
        let kind = match t.kind {
            TokenKind::Int => {
                self.advance();
                let v = t.text.parse::<i64>().map_err(|_| OclError::Syntax {
                    message: "integer literal out of range".into(),
                    span: t.span,
                })?;
                ExprKind::Int(v)
            }
            TokenKind::Real => {
                self.advance();
                let v = t.text.parse::<f64>().map_err(|_| OclError::Syntax {
                    message: "malformed real literal".into(),
                    span: t.span,
                })?;
                ExprKind::Real(v)
            }
            TokenKind::Str => {
                self.advance();
                ExprKind::Str(unquote(&t.text))
            }
            TokenKind::Bool => {
                self.advance();
                ExprKind::Bool(t.text == "true")
            }
            TokenKind::Keyword if t.text == "self" => {
                self.advance();
                ExprKind::SelfRef
            }
            TokenKind::Keyword if t.text == "result" => {
                self.advance();
                ExprKind::ResultRef
            }
            TokenKind::Ident => {
                self.advance();
                let at_pre = self.eat_at_pre();
                let e = if self.peek().is_punct("(") {
                    let args = self.call_args()?;
                    Expr::new(
                        ExprKind::Call {
                            receiver: None,
                            method: t.text.clone(),
                            args,
                        },
                        self.span_from(&t),
                    )
                } else {
                    Expr::new(ExprKind::Ident(t.text.clone()), t.span)
                };
                return match at_pre {
                    Some(marker) => self.wrap_at_pre(e, &t, &marker),
                    None => Ok(e),
                };
            }
            TokenKind::Punct if t.text == "(" => {
                self.advance();
                let inner = self.expression()?;
                self.expect_punct(")")?;
                return Ok(inner);
            }
            _ => return self.error("expected expression"),
        };
        Ok(Expr::new(kind, t.span))
    }
}
