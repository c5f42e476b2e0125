//! Recursive-descent parser and load-time structural checks.

use std::collections::{HashMap, HashSet};

use crate::ast::*;
use crate::error::LoadError;
use crate::lexer::{tokenize, Tok, Token};

/// Parses a program and checks its class structure. Purity is checked
/// separately by [`crate::check_purity`].
pub fn parse_program(src: &str) -> Result<Program, LoadError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let (program, has_main) = p.program()?;
    check_structure(&program)?;
    if !has_main {
        return Err(LoadError::Semantic("missing main block".into()));
    }
    Ok(program)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, LoadError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn line(&self) -> u32 {
        self.tokens[self.pos].line
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if !matches!(t, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let t = &self.tokens[self.pos];
        Err(LoadError::Syntax {
            message: message.into(),
            line: t.line,
            column: t.column,
        })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Keyword(k) => format!("`{k}`"),
            Tok::Int(i) => format!("integer {i}"),
            Tok::Real(r) => format!("real {r:?}"),
            Tok::Str(_) => "string literal".into(),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(x) if *x == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if matches!(self.peek(), Tok::Keyword(x) if *x == k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.error(format!("expected {what}, found {}", self.describe())),
        }
    }

    fn name_list(&mut self, what: &str) -> PResult<Vec<String>> {
        let mut out = vec![self.ident(what)?];
        while self.eat_sym(",") {
            out.push(self.ident(what)?);
        }
        Ok(out)
    }

    fn program(&mut self) -> PResult<(Program, bool)> {
        let mut classes = Vec::new();
        let mut interfaces = Vec::new();
        let mut main = None;
        loop {
            let line = self.line();
            if self.eat_kw("class") {
                classes.push(self.class(line)?);
            } else if self.eat_kw("interface") {
                interfaces.push(self.interface(line)?);
            } else if self.eat_kw("main") {
                if main.is_some() {
                    return Err(LoadError::Semantic(format!(
                        "duplicate main block at line {line}"
                    )));
                }
                main = Some(self.block()?);
            } else if matches!(self.peek(), Tok::Eof) {
                break;
            } else {
                return self.error(format!(
                    "expected `class`, `interface` or `main`, found {}",
                    self.describe()
                ));
            }
        }
        let class_index = classes
            .iter()
            .enumerate()
            .map(|(i, c): (usize, &ClassDef)| (c.name.clone(), i))
            .collect();
        let has_main = main.is_some();
        let program = Program {
            classes,
            interfaces,
            main: main.unwrap_or_default(),
            class_index,
        };
        Ok((program, has_main))
    }

    fn class(&mut self, line: u32) -> PResult<ClassDef> {
        let name = self.ident("class name")?;
        let base = if self.eat_kw("extends") {
            Some(self.ident("base class name")?)
        } else {
            None
        };
        let interfaces = if self.eat_kw("implements") {
            self.name_list("interface name")?
        } else {
            Vec::new()
        };
        self.expect_sym("{")?;
        let mut class = ClassDef {
            name,
            base,
            interfaces,
            fields: Vec::new(),
            methods: Vec::new(),
            constructor: None,
            line,
        };
        while !self.eat_sym("}") {
            let line = self.line();
            let (mut visibility, mut pure) = (None, false);
            loop {
                if self.eat_kw("public") || self.eat_kw("private") {
                    if visibility.is_some() {
                        return self.error("visibility given twice");
                    }
                    visibility = Some(match &self.tokens[self.pos - 1].tok {
                        Tok::Keyword("private") => Visibility::Private,
                        _ => Visibility::Public,
                    });
                } else if self.eat_kw("pure") {
                    pure = true;
                } else {
                    break;
                }
            }
            let visibility = visibility.unwrap_or(Visibility::Public);
            if self.eat_kw("var") {
                if pure {
                    return self.error("fields cannot be `pure`");
                }
                let name = self.ident("field name")?;
                self.expect_sym(";")?;
                if class.fields.iter().any(|f| f.name == name) {
                    return Err(LoadError::Semantic(format!(
                        "duplicate field {name} in {}",
                        class.name
                    )));
                }
                class.fields.push(FieldDef { name, visibility });
            } else if self.eat_kw("def") {
                let name = self.ident("method name")?;
                let params = self.params()?;
                let body = self.block()?;
                let def = MethodDef {
                    name,
                    params,
                    pure,
                    visibility,
                    body,
                    line,
                };
                if def.name == "init" {
                    if class.constructor.is_some() {
                        return Err(LoadError::Semantic(format!(
                            "duplicate method init in {}",
                            class.name
                        )));
                    }
                    class.constructor = Some(def);
                } else {
                    if class.methods.iter().any(|m| m.name == def.name) {
                        return Err(LoadError::Semantic(format!(
                            "duplicate method {} in {}",
                            def.name, class.name
                        )));
                    }
                    class.methods.push(def);
                }
            } else {
                return self.error(format!(
                    "expected `var` or `def`, found {}",
                    self.describe()
                ));
            }
        }
        Ok(class)
    }

    fn interface(&mut self, line: u32) -> PResult<InterfaceDef> {
        let name = self.ident("interface name")?;
        let extends = if self.eat_kw("extends") {
            self.name_list("interface name")?
        } else {
            Vec::new()
        };
        self.expect_sym("{")?;
        let mut methods: Vec<MethodSig> = Vec::new();
        while !self.eat_sym("}") {
            let pure = self.eat_kw("pure");
            if !self.eat_kw("def") {
                return self.error(format!("expected `def`, found {}", self.describe()));
            }
            let mname = self.ident("method name")?;
            let params = self.params()?;
            self.expect_sym(";")?;
            if methods.iter().any(|m| m.name == mname) {
                return Err(LoadError::Semantic(format!(
                    "duplicate method {mname} in {name}"
                )));
            }
            methods.push(MethodSig {
                name: mname,
                params,
                pure,
            });
        }
        Ok(InterfaceDef {
            name,
            extends,
            methods,
            line,
        })
    }

    fn params(&mut self) -> PResult<Vec<String>> {
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.eat_sym(")") {
            params = self.name_list("parameter name")?;
            self.expect_sym(")")?;
        }
        let mut seen = HashSet::new();
        for p in &params {
            if !seen.insert(p) {
                return self.error(format!("duplicate parameter {p}"));
            }
        }
        Ok(params)
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        while !self.eat_sym("}") {
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let line = self.line();
        let kind = if self.eat_kw("var") {
            let name = self.ident("variable name")?;
            let init = if self.eat_sym("=") {
                self.expr()?
            } else {
                Expr {
                    kind: ExprKind::Null,
                    line,
                }
            };
            self.expect_sym(";")?;
            StmtKind::VarDecl { name, init }
        } else if self.eat_kw("if") {
            return self.if_rest(line);
        } else if self.eat_kw("while") {
            self.expect_sym("(")?;
            let cond = self.expr()?;
            self.expect_sym(")")?;
            let body = self.block()?;
            StmtKind::While { cond, body }
        } else if self.eat_kw("return") {
            let value = if self.eat_sym(";") {
                None
            } else {
                let e = self.expr()?;
                self.expect_sym(";")?;
                Some(e)
            };
            StmtKind::Return(value)
        } else {
            let e = self.expr()?;
            let kind = if self.eat_sym("=") {
                let value = self.expr()?;
                match e.kind {
                    ExprKind::Name(name) => StmtKind::Assign { name, value },
                    ExprKind::Field { receiver, field } => StmtKind::FieldAssign {
                        target: *receiver,
                        field,
                        value,
                    },
                    _ => {
                        return Err(LoadError::Syntax {
                            message: "invalid assignment target".into(),
                            line,
                            column: 1,
                        })
                    }
                }
            } else {
                StmtKind::Expr(e)
            };
            self.expect_sym(";")?;
            kind
        };
        Ok(Stmt { kind, line })
    }

    fn if_rest(&mut self, line: u32) -> PResult<Stmt> {
        self.expect_sym("(")?;
        let cond = self.expr()?;
        self.expect_sym(")")?;
        let then_body = self.block()?;
        let else_body = if self.eat_kw("else") {
            let else_line = self.line();
            if self.eat_kw("if") {
                vec![self.if_rest(else_line)?]
            } else {
                self.block()?
            }
        } else {
            Vec::new()
        };
        Ok(Stmt {
            kind: StmtKind::If {
                cond,
                then_body,
                else_body,
            },
            line,
        })
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(0)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut left = self.unary()?;
        while let Some((op, prec)) = self.binop() {
            if prec < min_prec {
                break;
            }
            let line = self.line();
            self.pos += 1;
            let right = self.binary(prec + 1)?;
            left = Expr {
                kind: ExprKind::Binary {
                    op,
                    left: Box::new(left),
                    right: Box::new(right),
                },
                line,
            };
        }
        Ok(left)
    }

    fn binop(&self) -> Option<(BinOp, u8)> {
        let Tok::Sym(s) = self.peek() else {
            return None;
        };
        Some(match *s {
            "||" => (BinOp::Or, 1),
            "&&" => (BinOp::And, 2),
            "==" => (BinOp::Eq, 3),
            "!=" => (BinOp::Ne, 3),
            "<" => (BinOp::Lt, 4),
            "<=" => (BinOp::Le, 4),
            ">" => (BinOp::Gt, 4),
            ">=" => (BinOp::Ge, 4),
            "+" => (BinOp::Add, 5),
            "-" => (BinOp::Sub, 5),
            "*" => (BinOp::Mul, 6),
            "/" => (BinOp::Div, 6),
            "%" => (BinOp::Rem, 6),
            _ => return None,
        })
    }

    fn unary(&mut self) -> PResult<Expr> {
        let line = self.line();
        let op = if self.eat_sym("!") {
            UnOp::Not
        } else if self.eat_sym("-") {
            UnOp::Neg
        } else {
            return self.postfix();
        };
        let operand = self.unary()?;
        Ok(Expr {
            kind: ExprKind::Unary {
                op,
                operand: Box::new(operand),
            },
            line,
        })
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.eat_sym(".") {
            let line = self.line();
            let name = self.ident("member name")?;
            e = if matches!(self.peek(), Tok::Sym("(")) {
                let args = self.args()?;
                Expr {
                    kind: ExprKind::MethodCall {
                        receiver: Box::new(e),
                        method: name,
                        args,
                    },
                    line,
                }
            } else {
                Expr {
                    kind: ExprKind::Field {
                        receiver: Box::new(e),
                        field: name,
                    },
                    line,
                }
            };
        }
        Ok(e)
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if self.eat_sym(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat_sym(")") {
                return Ok(args);
            }
            self.expect_sym(",")?;
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let line = self.line();
        let kind = match self.peek().clone() {
            Tok::Int(i) => {
                self.advance();
                ExprKind::Int(i)
            }
            Tok::Real(r) => {
                self.advance();
                ExprKind::Real(r)
            }
            Tok::Str(s) => {
                self.advance();
                ExprKind::Str(s)
            }
            Tok::Keyword("true") => {
                self.advance();
                ExprKind::Bool(true)
            }
            Tok::Keyword("false") => {
                self.advance();
                ExprKind::Bool(false)
            }
            Tok::Keyword("null") => {
                self.advance();
                ExprKind::Null
            }
            Tok::Keyword("self") => {
                self.advance();
                ExprKind::SelfRef
            }
            Tok::Keyword("new") => {
                self.advance();
                let class = self.ident("class name")?;
                let args = self.args()?;
                ExprKind::New { class, args }
            }
            Tok::Ident(name) => {
                self.advance();
                if matches!(self.peek(), Tok::Sym("(")) {
                    let args = self.args()?;
                    ExprKind::Call { method: name, args }
                } else {
                    ExprKind::Name(name)
                }
            }
            Tok::Sym("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect_sym(")")?;
                return Ok(e);
            }
            _ => return self.error(format!("expected expression, found {}", self.describe())),
        };
        Ok(Expr { kind, line })
    }
}

fn semantic<T>(msg: String) -> Result<T, LoadError> {
    Err(LoadError::Semantic(msg))
}

fn check_structure(p: &Program) -> Result<(), LoadError> {
    let mut names: HashMap<&str, &str> = HashMap::new();
    for c in &p.classes {
        if names.insert(&c.name, "class").is_some() {
            return semantic(format!("duplicate class {}", c.name));
        }
    }
    for i in &p.interfaces {
        if names.insert(&i.name, "interface").is_some() {
            return semantic(format!("duplicate class {}", i.name));
        }
    }
    for c in &p.classes {
        if let Some(b) = &c.base {
            match names.get(b.as_str()) {
                None => return semantic(format!("unknown base class {b}")),
                Some(&"interface") => {
                    return semantic(format!("class {} cannot extend interface {b}", c.name))
                }
                _ => {}
            }
        }
        for i in &c.interfaces {
            if names.get(i.as_str()) != Some(&"interface") {
                return semantic(format!("unknown interface {i}"));
            }
        }
    }
    for i in &p.interfaces {
        for e in &i.extends {
            if names.get(e.as_str()) != Some(&"interface") {
                return semantic(format!("unknown interface {e}"));
            }
        }
    }
    // Class chains: walk at most N steps.
    for c in &p.classes {
        let mut cur = c.base.as_deref();
        let mut steps = 0;
        while let Some(b) = cur {
            steps += 1;
            if b == c.name || steps > p.classes.len() {
                return semantic(format!("inheritance cycle through {}", c.name));
            }
            cur = p.class(b).and_then(|x| x.base.as_deref());
        }
    }
    for i in &p.interfaces {
        let mut seen = HashSet::new();
        let mut todo: Vec<&str> = i.extends.iter().map(String::as_str).collect();
        while let Some(n) = todo.pop() {
            if n == i.name {
                return semantic(format!("inheritance cycle through {}", i.name));
            }
            if seen.insert(n) {
                if let Some(x) = p.interface(n) {
                    todo.extend(x.extends.iter().map(String::as_str));
                }
            }
        }
    }
    for c in &p.classes {
        let mut seen: HashSet<&str> = HashSet::new();
        for (f, _) in p.all_fields(&c.name) {
            if !seen.insert(&f.name) {
                return semantic(format!("duplicate field {} in {}", f.name, c.name));
            }
        }
        for i in p.interfaces_of(&c.name) {
            for sig in &i.methods {
                match p.resolve(&c.name, &sig.name) {
                    Some(r) if r.def.params.len() == sig.params.len() => {}
                    _ => {
                        return semantic(format!(
                            "class {} does not implement {}::{}",
                            c.name, i.name, sig.name
                        ))
                    }
                }
            }
        }
    }
    Ok(())
}
