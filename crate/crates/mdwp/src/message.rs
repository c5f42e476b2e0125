//! Message catalog. Every body is a JSON object whose `"type"` field names
//! the variant; commands and replies also carry `"id"`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::value::WireValue;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    NotSuspended,
    UnknownObject,
    UnknownClass,
    UnknownMethod,
    UnknownField,
    Purity,
    Arity,
    UnknownType,
    TargetException,
    /// A code this implementation does not know; treated as a generic
    /// protocol error.
    Other(String),
}

impl ErrorCode {
    pub fn as_str(&self) -> &str {
        match self {
            ErrorCode::NotSuspended => "NOT_SUSPENDED",
            ErrorCode::UnknownObject => "UNKNOWN_OBJECT",
            ErrorCode::UnknownClass => "UNKNOWN_CLASS",
            ErrorCode::UnknownMethod => "UNKNOWN_METHOD",
            ErrorCode::UnknownField => "UNKNOWN_FIELD",
            ErrorCode::Purity => "PURITY",
            ErrorCode::Arity => "ARITY",
            ErrorCode::UnknownType => "UNKNOWN_TYPE",
            ErrorCode::TargetException => "TARGET_EXCEPTION",
            ErrorCode::Other(s) => s,
        }
    }
}

impl From<String> for ErrorCode {
    fn from(s: String) -> Self {
        match s.as_str() {
            "NOT_SUSPENDED" => ErrorCode::NotSuspended,
            "UNKNOWN_OBJECT" => ErrorCode::UnknownObject,
            "UNKNOWN_CLASS" => ErrorCode::UnknownClass,
            "UNKNOWN_METHOD" => ErrorCode::UnknownMethod,
            "UNKNOWN_FIELD" => ErrorCode::UnknownField,
            "PURITY" => ErrorCode::Purity,
            "ARITY" => ErrorCode::Arity,
            "UNKNOWN_TYPE" => ErrorCode::UnknownType,
            "TARGET_EXCEPTION" => ErrorCode::TargetException,
            _ => ErrorCode::Other(s),
        }
    }
}

impl From<ErrorCode> for String {
    fn from(c: ErrorCode) -> Self {
        c.as_str().to_string()
    }
}

impl Serialize for ErrorCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ErrorCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d).map(ErrorCode::from)
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldInfo {
    pub name: String,
    pub visibility: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodInfo {
    pub name: String,
    pub params: Vec<String>,
    pub pure: bool,
    pub visibility: String,
    pub declaring: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassInfoBody {
    pub name: String,
    pub base: Option<String>,
    pub interfaces: Vec<String>,
    pub fields: Vec<FieldInfo>,
    pub methods: Vec<MethodInfo>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub is_interface: bool,
}

/// Shared shape of method entry and exit events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MethodEvent {
    pub frame_id: u64,
    pub class: String,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub this_id: Option<u64>,
    pub args: Vec<WireValue>,
    pub caller_class: String,
    pub caller_method: String,
    pub caller_line: u32,
    /// Present on exit events only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub return_value: Option<WireValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all_fields = "camelCase")]
pub enum Event {
    VmStart,
    MethodEntry(MethodEvent),
    MethodExit(MethodEvent),
    VmDeath {
        exit_status: i32,
        entry_count: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSet {
    pub suspend: bool,
    pub events: Vec<Event>,
}

impl EventSet {
    pub fn is_death(&self) -> bool {
        self.events
            .iter()
            .any(|e| matches!(e, Event::VmDeath { .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all_fields = "camelCase")]
pub enum Payload {
    // commands
    ListClasses,
    ClassInfo {
        class: String,
    },
    SetEventPolicy {
        classes: Vec<String>,
        entry: bool,
        exit: bool,
    },
    Resume,
    Suspend,
    ReadField {
        obj_id: u64,
        field: String,
    },
    ReadSeq {
        seq_id: u64,
    },
    InvokeMethod {
        obj_id: u64,
        method: String,
        args: Vec<WireValue>,
    },
    HeapDigest,
    Disconnect,
    // replies
    Ok,
    Error {
        code: ErrorCode,
        msg: String,
    },
    ClassList {
        classes: Vec<String>,
    },
    ClassInfoReply(ClassInfoBody),
    ValueReply {
        value: WireValue,
    },
    SeqReply {
        elements: Vec<WireValue>,
    },
    DigestReply {
        hex64: String,
    },
    // events
    EventSet(EventSet),
}

impl Payload {
    pub fn type_name(&self) -> &'static str {
        match self {
            Payload::ListClasses => "ListClasses",
            Payload::ClassInfo { .. } => "ClassInfo",
            Payload::SetEventPolicy { .. } => "SetEventPolicy",
            Payload::Resume => "Resume",
            Payload::Suspend => "Suspend",
            Payload::ReadField { .. } => "ReadField",
            Payload::ReadSeq { .. } => "ReadSeq",
            Payload::InvokeMethod { .. } => "InvokeMethod",
            Payload::HeapDigest => "HeapDigest",
            Payload::Disconnect => "Disconnect",
            Payload::Ok => "Ok",
            Payload::Error { .. } => "Error",
            Payload::ClassList { .. } => "ClassList",
            Payload::ClassInfoReply(_) => "ClassInfoReply",
            Payload::ValueReply { .. } => "ValueReply",
            Payload::SeqReply { .. } => "SeqReply",
            Payload::DigestReply { .. } => "DigestReply",
            Payload::EventSet(_) => "EventSet",
        }
    }

    pub fn is_command(&self) -> bool {
        matches!(
            self,
            Payload::ListClasses
                | Payload::ClassInfo { .. }
                | Payload::SetEventPolicy { .. }
                | Payload::Resume
                | Payload::Suspend
                | Payload::ReadField { .. }
                | Payload::ReadSeq { .. }
                | Payload::InvokeMethod { .. }
                | Payload::HeapDigest
                | Payload::Disconnect
        )
    }

    pub fn is_reply(&self) -> bool {
        !self.is_command() && !matches!(self, Payload::EventSet(_))
    }

    pub fn error(code: ErrorCode, msg: impl Into<String>) -> Self {
        Payload::Error {
            code,
            msg: msg.into(),
        }
    }
}

pub const TYPE_NAMES: &[&str] = &[
    "ListClasses",
    "ClassInfo",
    "SetEventPolicy",
    "Resume",
    "Suspend",
    "ReadField",
    "ReadSeq",
    "InvokeMethod",
    "HeapDigest",
    "Disconnect",
    "Ok",
    "Error",
    "ClassList",
    "ClassInfoReply",
    "ValueReply",
    "SeqReply",
    "DigestReply",
    "EventSet",
];

/// One framed message: commands and replies carry an id, event sets do not.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub id: Option<u64>,
    pub payload: Payload,
}

impl Message {
    pub fn new(id: Option<u64>, payload: Payload) -> Self {
        Message { id, payload }
    }

    pub fn event_set(set: EventSet) -> Self {
        Message {
            id: None,
            payload: Payload::EventSet(set),
        }
    }
}
