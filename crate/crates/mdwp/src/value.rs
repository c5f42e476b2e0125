use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value as Json;

/// A VM value as it travels on the wire:
/// `{"k":"int","v":N}`, `{"k":"ref","id":n,"class":name}`, `{"k":"null"}` and so on.
#[derive(Debug, Clone, PartialEq)]
pub enum WireValue {
    Int(i64),
    Real(f64),
    Bool(bool),
    Str(String),
    Null,
    Ref { id: u64, class: String },
    Seq { id: u64 },
}

impl Serialize for WireValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        match self {
            WireValue::Int(v) => {
                m.serialize_entry("k", "int")?;
                m.serialize_entry("v", v)?;
            }
            WireValue::Real(v) => {
                m.serialize_entry("k", "real")?;
                m.serialize_entry("v", v)?;
            }
            WireValue::Bool(v) => {
                m.serialize_entry("k", "bool")?;
                m.serialize_entry("v", v)?;
            }
            WireValue::Str(v) => {
                m.serialize_entry("k", "str")?;
                m.serialize_entry("v", v)?;
            }
            WireValue::Null => m.serialize_entry("k", "null")?,
            WireValue::Ref { id, class } => {
                m.serialize_entry("k", "ref")?;
                m.serialize_entry("id", id)?;
                m.serialize_entry("class", class)?;
            }
            WireValue::Seq { id } => {
                m.serialize_entry("k", "seq")?;
                m.serialize_entry("id", id)?;
            }
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for WireValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let json = Json::deserialize(d)?;
        let obj = json
            .as_object()
            .ok_or_else(|| D::Error::custom("value must be an object"))?;
        let kind = obj
            .get("k")
            .and_then(Json::as_str)
            .ok_or_else(|| D::Error::custom("value is missing \"k\""))?;
        let field = |name: &str| {
            obj.get(name)
                .ok_or_else(|| D::Error::custom(format!("{kind} value is missing \"{name}\"")))
        };
        let bad = |name: &str| D::Error::custom(format!("{kind} value has malformed \"{name}\""));
        Ok(match kind {
            "int" => WireValue::Int(field("v")?.as_i64().ok_or_else(|| bad("v"))?),
            "real" => WireValue::Real(field("v")?.as_f64().ok_or_else(|| bad("v"))?),
            "bool" => WireValue::Bool(field("v")?.as_bool().ok_or_else(|| bad("v"))?),
            "str" => WireValue::Str(field("v")?.as_str().ok_or_else(|| bad("v"))?.to_string()),
            "null" => WireValue::Null,
            "ref" => WireValue::Ref {
                id: field("id")?.as_u64().ok_or_else(|| bad("id"))?,
                class: field("class")?
                    .as_str()
                    .ok_or_else(|| bad("class"))?
                    .to_string(),
            },
            "seq" => WireValue::Seq {
                id: field("id")?.as_u64().ok_or_else(|| bad("id"))?,
            },
            other => return Err(D::Error::custom(format!("unknown value kind `{other}`"))),
        })
    }
}
