//! Expression trees and constraint declarations.

use std::fmt;

use crate::span::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Negate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    And,
    Or,
    Xor,
    Implies,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
            BinaryOp::Xor => "xor",
            BinaryOp::Implies => "implies",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "<>",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }

    /// Binding strength, lowest first. Postfix and primary forms sit above
    /// every binary operator.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Implies => 1,
            BinaryOp::Xor => 2,
            BinaryOp::Or => 3,
            BinaryOp::And => 4,
            BinaryOp::Eq
            | BinaryOp::Ne
            | BinaryOp::Lt
            | BinaryOp::Le
            | BinaryOp::Gt
            | BinaryOp::Ge => 5,
            BinaryOp::Add | BinaryOp::Sub => 6,
            BinaryOp::Mul | BinaryOp::Div => 7,
        }
    }

    pub fn is_relational(self) -> bool {
        self.precedence() == 5
    }

    pub fn is_logical(self) -> bool {
        self.precedence() <= 4
    }
}

pub const UNARY_PRECEDENCE: u8 = 8;
pub const POSTFIX_PRECEDENCE: u8 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CollectionOp {
    Size,
    IsEmpty,
    NotEmpty,
    Includes,
    At,
    ForAll,
    Exists,
}

impl CollectionOp {
    pub const ALL: [CollectionOp; 7] = [
        CollectionOp::Size,
        CollectionOp::IsEmpty,
        CollectionOp::NotEmpty,
        CollectionOp::Includes,
        CollectionOp::At,
        CollectionOp::ForAll,
        CollectionOp::Exists,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CollectionOp::Size => "size",
            CollectionOp::IsEmpty => "isEmpty",
            CollectionOp::NotEmpty => "notEmpty",
            CollectionOp::Includes => "includes",
            CollectionOp::At => "at",
            CollectionOp::ForAll => "forAll",
            CollectionOp::Exists => "exists",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|op| op.name() == name)
    }

    pub fn is_quantifier(self) -> bool {
        matches!(self, CollectionOp::ForAll | CollectionOp::Exists)
    }

    /// Number of plain arguments; quantifiers take a binder and a body instead.
    pub fn arity(self) -> usize {
        match self {
            CollectionOp::Size | CollectionOp::IsEmpty | CollectionOp::NotEmpty => 0,
            CollectionOp::Includes | CollectionOp::At => 1,
            CollectionOp::ForAll | CollectionOp::Exists => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Real(f64),
    Str(String),
    Bool(bool),
    SelfRef,
    ResultRef,
    /// A bare name: a context parameter or a quantifier variable.
    Ident(String),
    Call {
        receiver: Option<Box<Expr>>,
        method: String,
        args: Vec<Expr>,
    },
    Field {
        receiver: Box<Expr>,
        field: String,
    },
    AtPre(Box<Expr>),
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    /// `receiver->op(args)`; quantifiers carry the bound name in `binder`
    /// and their body as the single element of `args`.
    Collection {
        receiver: Box<Expr>,
        op: CollectionOp,
        binder: Option<String>,
        args: Vec<Expr>,
    },
}

/// An expression node. Equality is structural and ignores spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: SourceSpan,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: SourceSpan) -> Self {
        Expr { kind, span }
    }

    /// Builds a node with a default span; handy for synthesized trees.
    pub fn synth(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: SourceSpan::default(),
        }
    }

    pub fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary { op, .. } => op.precedence(),
            ExprKind::Unary { .. } => UNARY_PRECEDENCE,
            _ => POSTFIX_PRECEDENCE,
        }
    }

    /// Direct children in left-to-right source order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Int(_)
            | ExprKind::Real(_)
            | ExprKind::Str(_)
            | ExprKind::Bool(_)
            | ExprKind::SelfRef
            | ExprKind::ResultRef
            | ExprKind::Ident(_) => Vec::new(),
            ExprKind::Call { receiver, args, .. } => {
                receiver.iter().map(|r| &**r).chain(args.iter()).collect()
            }
            ExprKind::Field { receiver, .. } => vec![receiver],
            ExprKind::AtPre(inner) => vec![inner],
            ExprKind::Unary { operand, .. } => vec![operand],
            ExprKind::Binary { left, right, .. } => vec![left, right],
            ExprKind::Collection { receiver, args, .. } => {
                std::iter::once(&**receiver).chain(args.iter()).collect()
            }
        }
    }

    /// Pre-order walk over this node and all descendants.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        visit(self);
        for child in self.children() {
            child.walk(visit);
        }
    }

    pub fn any(&self, pred: &impl Fn(&Expr) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any(pred))
    }

    pub fn contains_at_pre(&self) -> bool {
        self.any(&|e| matches!(e.kind, ExprKind::AtPre(_)))
    }

    pub fn contains_result(&self) -> bool {
        self.any(&|e| matches!(e.kind, ExprKind::ResultRef))
    }

    /// The receiver this node navigates from, if it is a postfix form.
    pub fn postfix_receiver(&self) -> Option<&Expr> {
        match &self.kind {
            ExprKind::Call { receiver, .. } => receiver.as_deref(),
            ExprKind::Field { receiver, .. } => Some(receiver),
            ExprKind::AtPre(inner) => Some(inner),
            ExprKind::Collection { receiver, .. } => Some(receiver),
            _ => None,
        }
    }

    /// True when an `@pre` marker appears on this node's navigation spine,
    /// i.e. this node or one of its successive receivers is an `AtPre`.
    pub fn spine_has_at_pre(&self) -> bool {
        let mut cur = Some(self);
        while let Some(e) = cur {
            if matches!(e.kind, ExprKind::AtPre(_)) {
                return true;
            }
            cur = e.postfix_receiver();
        }
        false
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::format::format_expr(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClauseKind {
    Inv,
    Pre,
    Post,
}

impl ClauseKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ClauseKind::Inv => "inv",
            ClauseKind::Pre => "pre",
            ClauseKind::Post => "post",
        }
    }
}

impl fmt::Display for ClauseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub kind: ClauseKind,
    pub label: Option<String>,
    pub expr: Expr,
    pub origin: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub type_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSig {
    pub name: String,
    pub params: Vec<Param>,
    pub return_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextDecl {
    pub class_name: String,
    pub method: Option<MethodSig>,
    pub clauses: Vec<Clause>,
    pub span: SourceSpan,
}

impl ContextDecl {
    pub fn param_names(&self) -> impl Iterator<Item = &str> {
        self.method
            .iter()
            .flat_map(|m| m.params.iter().map(|p| p.name.as_str()))
    }

    /// `Class` or `Class::method`.
    pub fn key(&self) -> String {
        match &self.method {
            Some(m) => format!("{}::{}", self.class_name, m.name),
            None => self.class_name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintFile {
    pub decls: Vec<ContextDecl>,
    pub source_name: String,
}
