//! The OCL subset used by constraint files: invariants, preconditions and
//! postconditions over a class model, with `self`, `result`, `@pre`,
//! arithmetic, logic and sequence operations.

pub mod ast;
pub mod chains;
pub mod error;
pub mod format;
pub mod lexer;
pub mod parser;
pub mod span;
pub mod validate;

pub use ast::{
    BinaryOp, Clause, ClauseKind, CollectionOp, ConstraintFile, ContextDecl, Expr, ExprKind,
    MethodSig, Param, UnaryOp,
};
pub use chains::{extract_pre_chains, slot_of, PreChain};
pub use error::{Diagnostic, OclError};
pub use format::format_expr;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse_constraint_file, parse_constraint_file_named, parse_expression};
pub use span::SourceSpan;
pub use validate::validate_clause;
