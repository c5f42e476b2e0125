//! Runtime contract auditing over a debug session: the constraint table,
//! the evaluator, blame attribution and the report.

pub mod audit;
pub mod eval;
pub mod report;
pub mod table;
pub mod target;
pub mod verdict;

pub use audit::{exit_code, run_audit, AuditError, AuditOptions, Auditor, Kinds};
pub use eval::{capture, evaluate, evaluate_clause, judge, AtPre, Captured, EvalEnv, Fault};
pub use report::{
    parse_report, AuditRecord, AuditSummary, Phase, ReportLine, ReportWriter, HEADER_NOTE,
};
pub use table::{
    build_constraint_table, build_with_catalog, ConstraintTable, EffectiveConstraints,
    MethodClauses, PreGroup, TableClause,
};
pub use target::Target;
pub use verdict::{all_of, any_of, combine_pre, BlameTag, ErrorCode, Outcome, Party, Verdict};
