use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Pass,
    Fail,
    Error,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Error => "ERROR",
        }
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why a clause could not be judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    TypeMismatch,
    PurityViolation,
    UnknownIdentifier,
    TargetException,
    CaptureMissing,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::TypeMismatch => "TYPE_MISMATCH",
            ErrorCode::PurityViolation => "PURITY_VIOLATION",
            ErrorCode::UnknownIdentifier => "UNKNOWN_IDENTIFIER",
            ErrorCode::TargetException => "TARGET_EXCEPTION",
            ErrorCode::CaptureMissing => "CAPTURE_MISSING",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Set exactly when the outcome is `Error`.
    pub error_code: Option<ErrorCode>,
    pub detail: String,
}

impl Verdict {
    pub fn pass() -> Self {
        Verdict {
            outcome: Outcome::Pass,
            error_code: None,
            detail: String::new(),
        }
    }

    pub fn fail(detail: impl Into<String>) -> Self {
        Verdict {
            outcome: Outcome::Fail,
            error_code: None,
            detail: detail.into(),
        }
    }

    pub fn error(code: ErrorCode, detail: impl Into<String>) -> Self {
        Verdict {
            outcome: Outcome::Error,
            error_code: Some(code),
            detail: detail.into(),
        }
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::pass()
        } else {
            Verdict::fail("")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Party {
    Client,
    Server,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlameTag {
    pub party: Party,
    pub class: String,
    pub method: String,
    /// The call line for client blame; absent for server blame.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
}

/// Conjunction under three-valued logic: any FAIL decides, otherwise any
/// ERROR makes the result unknown. Empty input is PASS.
pub fn all_of(outcomes: impl IntoIterator<Item = Outcome>) -> Outcome {
    let mut acc = Outcome::Pass;
    for o in outcomes {
        match o {
            Outcome::Fail => return Outcome::Fail,
            Outcome::Error => acc = Outcome::Error,
            Outcome::Pass => {}
        }
    }
    acc
}

/// Disjunction under three-valued logic: any PASS decides, otherwise any
/// ERROR makes the result unknown. Empty input is FAIL.
pub fn any_of(outcomes: impl IntoIterator<Item = Outcome>) -> Outcome {
    let mut acc = Outcome::Fail;
    for o in outcomes {
        match o {
            Outcome::Pass => return Outcome::Pass,
            Outcome::Error => acc = Outcome::Error,
            Outcome::Fail => {}
        }
    }
    acc
}

/// Effective precondition: OR over declaring-type groups, each the AND of
/// its clauses. No groups at all means there is nothing to satisfy.
pub fn combine_pre(groups: &[Vec<Outcome>]) -> Outcome {
    if groups.is_empty() {
        return Outcome::Pass;
    }
    any_of(groups.iter().map(|g| all_of(g.iter().copied())))
}
