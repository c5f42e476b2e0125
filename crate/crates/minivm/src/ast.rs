//! MiniObj syntax tree and the loaded program model.

use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Visibility {
    Public,
    Private,
}

impl Visibility {
    pub fn as_str(self) -> &'static str {
        match self {
            Visibility::Public => "public",
            Visibility::Private => "private",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Real(f64),
    Str(String),
    Bool(bool),
    Null,
    SelfRef,
    /// A local, a parameter, or a field of `self`, resolved in that order.
    Name(String),
    /// `m(args)` without a receiver: a built-in or a method of `self`.
    Call {
        method: String,
        args: Vec<Expr>,
    },
    MethodCall {
        receiver: Box<Expr>,
        method: String,
        args: Vec<Expr>,
    },
    Field {
        receiver: Box<Expr>,
        field: String,
    },
    New {
        class: String,
        args: Vec<Expr>,
    },
    Unary {
        op: UnOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    VarDecl {
        name: String,
        init: Expr,
    },
    /// `x = e`: a local or parameter if one is in scope, else a field of `self`.
    Assign {
        name: String,
        value: Expr,
    },
    FieldAssign {
        target: Expr,
        field: String,
        value: Expr,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    Return(Option<Expr>),
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDef {
    pub name: String,
    pub visibility: Visibility,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDef {
    pub name: String,
    pub params: Vec<String>,
    pub pure: bool,
    pub visibility: Visibility,
    pub body: Vec<Stmt>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDef {
    pub name: String,
    pub base: Option<String>,
    pub interfaces: Vec<String>,
    pub fields: Vec<FieldDef>,
    pub methods: Vec<MethodDef>,
    /// The `init` method, kept apart from ordinary methods.
    pub constructor: Option<MethodDef>,
    pub line: u32,
}

impl ClassDef {
    pub fn method(&self, name: &str) -> Option<&MethodDef> {
        if name == "init" {
            return self.constructor.as_ref();
        }
        self.methods.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSig {
    pub name: String,
    pub params: Vec<String>,
    pub pure: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceDef {
    pub name: String,
    pub extends: Vec<String>,
    pub methods: Vec<MethodSig>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub classes: Vec<ClassDef>,
    pub interfaces: Vec<InterfaceDef>,
    pub main: Vec<Stmt>,
    pub(crate) class_index: HashMap<String, usize>,
}

/// A method resolved for some class, together with the class that
/// declares the body.
#[derive(Debug, Clone, Copy)]
pub struct Resolved<'a> {
    pub def: &'a MethodDef,
    pub declaring: &'a str,
}

impl Program {
    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.class_index.get(name).map(|&i| &self.classes[i])
    }

    pub fn interface(&self, name: &str) -> Option<&InterfaceDef> {
        self.interfaces.iter().find(|i| i.name == name)
    }

    /// The class followed by its ancestors, most derived first.
    pub fn chain(&self, name: &str) -> Vec<&ClassDef> {
        let mut out = Vec::new();
        let mut cur = self.class(name);
        while let Some(c) = cur {
            out.push(c);
            cur = c.base.as_deref().and_then(|b| self.class(b));
        }
        out
    }

    pub fn is_subclass(&self, class: &str, ancestor: &str) -> bool {
        self.chain(class).iter().any(|c| c.name == ancestor)
    }

    /// Dynamic dispatch: the most derived definition of `method`.
    pub fn resolve(&self, class: &str, method: &str) -> Option<Resolved<'_>> {
        self.chain(class).into_iter().find_map(|c| {
            c.method(method).map(|def| Resolved {
                def,
                declaring: &c.name,
            })
        })
    }

    /// Every field of an instance, root-most class first, with its declaring class.
    pub fn all_fields(&self, class: &str) -> Vec<(&FieldDef, &str)> {
        let mut chain = self.chain(class);
        chain.reverse();
        chain
            .into_iter()
            .flat_map(|c| c.fields.iter().map(move |f| (f, c.name.as_str())))
            .collect()
    }

    /// Every method callable on an instance, constructor included, in
    /// root-first declaration order with overrides replacing in place.
    pub fn all_methods(&self, class: &str) -> Vec<Resolved<'_>> {
        let mut chain = self.chain(class);
        chain.reverse();
        let mut out: Vec<Resolved<'_>> = Vec::new();
        for c in chain {
            for def in c.constructor.iter().chain(c.methods.iter()) {
                let r = Resolved {
                    def,
                    declaring: &c.name,
                };
                match out.iter_mut().find(|m| m.def.name == def.name) {
                    Some(slot) => *slot = r,
                    None => out.push(r),
                }
            }
        }
        out
    }

    /// All interfaces a class implements, directly, through its ancestors or
    /// through interface inheritance.
    pub fn interfaces_of(&self, class: &str) -> Vec<&InterfaceDef> {
        let mut out: Vec<&InterfaceDef> = Vec::new();
        let mut todo: Vec<&str> = Vec::new();
        for c in self.chain(class) {
            todo.extend(c.interfaces.iter().map(String::as_str));
        }
        while let Some(name) = todo.pop() {
            if let Some(i) = self.interface(name) {
                if !out.iter().any(|o| o.name == i.name) {
                    out.push(i);
                    todo.extend(i.extends.iter().map(String::as_str));
                }
            }
        }
        out
    }
}
