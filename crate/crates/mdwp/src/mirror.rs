//! Auditor-side proxies for entities living in the target VM.
//!
//! Object and sequence mirrors remember which session produced them; using
//! one with another session is rejected.

use std::fmt;

use crate::message::{ClassInfoBody, MethodInfo};
use crate::value::WireValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Visibility {
    Public,
    Private,
}

impl Visibility {
    pub fn parse(s: &str) -> Self {
        if s == "private" {
            Visibility::Private
        } else {
            Visibility::Public
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Visibility::Public => "public",
            Visibility::Private => "private",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObjectMirror {
    pub id: u64,
    pub class: String,
    pub session: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeqMirror {
    pub id: u64,
    pub session: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMirror {
    pub name: String,
    pub visibility: Visibility,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodMirror {
    pub name: String,
    pub params: Vec<String>,
    pub pure: bool,
    pub visibility: Visibility,
    pub declaring: String,
}

impl MethodMirror {
    pub fn is_constructor(&self) -> bool {
        self.name == "init"
    }
}

impl From<&MethodInfo> for MethodMirror {
    fn from(m: &MethodInfo) -> Self {
        MethodMirror {
            name: m.name.clone(),
            params: m.params.clone(),
            pure: m.pure,
            visibility: Visibility::parse(&m.visibility),
            declaring: m.declaring.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMirror {
    pub name: String,
    pub base: Option<String>,
    pub interfaces: Vec<String>,
    pub fields: Vec<FieldMirror>,
    /// Every method callable on instances, inherited ones included, each
    /// tagged with the class that defines the body that runs.
    pub methods: Vec<MethodMirror>,
    pub is_interface: bool,
}

impl ClassMirror {
    pub fn method(&self, name: &str) -> Option<&MethodMirror> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn field(&self, name: &str) -> Option<&FieldMirror> {
        self.fields.iter().find(|f| f.name == name)
    }
}

impl From<ClassInfoBody> for ClassMirror {
    fn from(b: ClassInfoBody) -> Self {
        ClassMirror {
            methods: b.methods.iter().map(MethodMirror::from).collect(),
            fields: b
                .fields
                .iter()
                .map(|f| FieldMirror {
                    name: f.name.clone(),
                    visibility: Visibility::parse(&f.visibility),
                })
                .collect(),
            name: b.name,
            base: b.base,
            interfaces: b.interfaces,
            is_interface: b.is_interface,
        }
    }
}

/// A value read from the VM. `Snapshot` is an auditor-side copy of a
/// sequence's elements at some instant; its element references stay mirrors.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueMirror {
    Int(i64),
    Real(f64),
    Bool(bool),
    Str(String),
    Null,
    Ref(ObjectMirror),
    Seq(SeqMirror),
    Snapshot(Vec<ValueMirror>),
}

impl ValueMirror {
    pub fn from_wire(v: WireValue, session: u64) -> Self {
        match v {
            WireValue::Int(i) => ValueMirror::Int(i),
            WireValue::Real(r) => ValueMirror::Real(r),
            WireValue::Bool(b) => ValueMirror::Bool(b),
            WireValue::Str(s) => ValueMirror::Str(s),
            WireValue::Null => ValueMirror::Null,
            WireValue::Ref { id, class } => ValueMirror::Ref(ObjectMirror { id, class, session }),
            WireValue::Seq { id } => ValueMirror::Seq(SeqMirror { id, session }),
        }
    }

    /// Snapshots have no wire form; `None` for them.
    pub fn to_wire(&self) -> Option<WireValue> {
        Some(match self {
            ValueMirror::Int(i) => WireValue::Int(*i),
            ValueMirror::Real(r) => WireValue::Real(*r),
            ValueMirror::Bool(b) => WireValue::Bool(*b),
            ValueMirror::Str(s) => WireValue::Str(s.clone()),
            ValueMirror::Null => WireValue::Null,
            ValueMirror::Ref(o) => WireValue::Ref {
                id: o.id,
                class: o.class.clone(),
            },
            ValueMirror::Seq(s) => WireValue::Seq { id: s.id },
            ValueMirror::Snapshot(_) => return None,
        })
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            ValueMirror::Int(_) => "Integer",
            ValueMirror::Real(_) => "Real",
            ValueMirror::Bool(_) => "Boolean",
            ValueMirror::Str(_) => "String",
            ValueMirror::Null => "null",
            ValueMirror::Ref(_) => "object",
            ValueMirror::Seq(_) | ValueMirror::Snapshot(_) => "Sequence",
        }
    }
}

impl fmt::Display for ValueMirror {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueMirror::Int(i) => write!(f, "{i}"),
            ValueMirror::Real(r) => write!(f, "{r:?}"),
            ValueMirror::Bool(b) => write!(f, "{b}"),
            ValueMirror::Str(s) => write!(f, "{s:?}"),
            ValueMirror::Null => f.write_str("null"),
            ValueMirror::Ref(o) => write!(f, "{}#{}", o.class, o.id),
            ValueMirror::Seq(s) => write!(f, "seq#{}", s.id),
            ValueMirror::Snapshot(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}
