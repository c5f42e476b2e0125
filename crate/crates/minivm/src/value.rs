use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::hash::Hasher;

use fnv::FnvHasher;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Bool(bool),
    Str(String),
    Null,
    Ref { id: u64, class: String },
    Seq(u64),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "Int",
            Value::Real(_) => "Real",
            Value::Bool(_) => "Bool",
            Value::Str(_) => "Str",
            Value::Null => "null",
            Value::Ref { .. } => "object",
            Value::Seq(_) => "seq",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Object {
    pub class: String,
    /// Slots in declaration order, root-most class first.
    pub fields: Vec<(String, Value)>,
}

impl Object {
    pub fn field(&self, name: &str) -> Option<&Value> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn field_mut(&mut self, name: &str) -> Option<&mut Value> {
        self.fields
            .iter_mut()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HeapEntry {
    Object(Object),
    Seq(Vec<Value>),
}

/// Objects and sequences share one id space; ids start at 1 and are never
/// reused.
#[derive(Debug, Clone, Default)]
pub struct Heap {
    entries: BTreeMap<u64, HeapEntry>,
    next_id: u64,
}

impl Heap {
    pub fn alloc(&mut self, entry: HeapEntry) -> u64 {
        self.next_id += 1;
        self.entries.insert(self.next_id, entry);
        self.next_id
    }

    pub fn get(&self, id: u64) -> Option<&HeapEntry> {
        self.entries.get(&id)
    }

    pub fn get_mut(&mut self, id: u64) -> Option<&mut HeapEntry> {
        self.entries.get_mut(&id)
    }

    pub fn object(&self, id: u64) -> Option<&Object> {
        match self.entries.get(&id) {
            Some(HeapEntry::Object(o)) => Some(o),
            _ => None,
        }
    }

    pub fn seq(&self, id: u64) -> Option<&Vec<Value>> {
        match self.entries.get(&id) {
            Some(HeapEntry::Seq(s)) => Some(s),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &HeapEntry)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    /// FNV-1a 64 over a canonical serialization: entries in ascending id
    /// order, fields in declaration order, every value tagged by variant.
    pub fn digest(&self) -> u64 {
        let mut h = FnvHasher::default();
        for (id, entry) in &self.entries {
            h.write(&id.to_le_bytes());
            match entry {
                HeapEntry::Object(o) => {
                    h.write(b"O");
                    write_str(&mut h, &o.class);
                    h.write(&(o.fields.len() as u64).to_le_bytes());
                    for (name, v) in &o.fields {
                        write_str(&mut h, name);
                        write_value(&mut h, v);
                    }
                }
                HeapEntry::Seq(items) => {
                    h.write(b"S");
                    h.write(&(items.len() as u64).to_le_bytes());
                    for v in items {
                        write_value(&mut h, v);
                    }
                }
            }
        }
        h.finish()
    }

    /// Text for `print`: sequences show their elements, objects their
    /// class and id.
    pub fn display(&self, v: &Value) -> String {
        let mut out = String::new();
        self.display_into(v, &mut out, 0);
        out
    }

    fn display_into(&self, v: &Value, out: &mut String, depth: usize) {
        match v {
            Value::Seq(id) if depth < 8 => {
                out.push('[');
                for (i, e) in self.seq(*id).into_iter().flatten().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    self.display_into(e, out, depth + 1);
                }
                out.push(']');
            }
            other => {
                let _ = write!(out, "{other}");
            }
        }
    }
}

fn write_str(h: &mut FnvHasher, s: &str) {
    h.write(&(s.len() as u64).to_le_bytes());
    h.write(s.as_bytes());
}

fn write_value(h: &mut FnvHasher, v: &Value) {
    match v {
        Value::Int(i) => {
            h.write(b"i");
            h.write(&i.to_le_bytes());
        }
        Value::Real(r) => {
            h.write(b"r");
            h.write(&r.to_bits().to_le_bytes());
        }
        Value::Bool(b) => h.write(&[b'b', *b as u8]),
        Value::Str(s) => {
            h.write(b"s");
            write_str(h, s);
        }
        Value::Null => h.write(b"n"),
        Value::Ref { id, .. } => {
            h.write(b"o");
            h.write(&id.to_le_bytes());
        }
        Value::Seq(id) => {
            h.write(b"q");
            h.write(&id.to_le_bytes());
        }
    }
}

pub fn digest_hex(d: u64) -> String {
    format!("{d:016x}")
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r:?}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => f.write_str(s),
            Value::Null => f.write_str("null"),
            Value::Ref { id, class } => write!(f, "{class}#{id}"),
            Value::Seq(id) => write!(f, "seq#{id}"),
        }
    }
}
