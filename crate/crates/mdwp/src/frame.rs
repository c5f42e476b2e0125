//! Framing: a 4-byte big-endian body length followed by a UTF-8 JSON body.

use std::io::{self, Read, Write};

use serde_json::{Map, Value as Json};

use crate::error::LinkError;
use crate::message::{Message, Payload};

/// Frames above this size are treated as corrupt rather than allocated.
pub const MAX_BODY: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq)]
pub enum Decoded {
    Message(Message),
    /// Well-formed JSON that does not match the catalog. The receiver answers
    /// with `Error UNKNOWN_TYPE` and keeps the connection open.
    Malformed {
        id: Option<u64>,
        type_name: Option<String>,
        reason: String,
    },
}

pub fn header_for(len: usize) -> Result<[u8; 4], LinkError> {
    if len == 0 {
        return Err(LinkError::Framing("empty frame body".into()));
    }
    let len = u32::try_from(len)
        .map_err(|_| LinkError::Framing(format!("body of {len} bytes exceeds header width")))?;
    Ok(len.to_be_bytes())
}

/// Canonical JSON body: `"type"` first, then `"id"`, then payload fields.
pub fn encode_body(m: &Message) -> Vec<u8> {
    let Json::Object(fields) = serde_json::to_value(&m.payload).expect("payload serializes") else {
        unreachable!("payloads serialize to objects")
    };
    let mut out = Map::new();
    let mut rest = fields.into_iter();
    if let Some((k, v)) = rest.next() {
        out.insert(k, v);
    }
    if let Some(id) = m.id {
        out.insert("id".into(), Json::from(id));
    }
    out.extend(rest);
    serde_json::to_vec(&Json::Object(out)).expect("json serializes")
}

pub fn encode_frame(m: &Message) -> Result<Vec<u8>, LinkError> {
    let body = encode_body(m);
    let header = header_for(body.len())?;
    let mut out = Vec::with_capacity(4 + body.len());
    out.extend_from_slice(&header);
    out.extend_from_slice(&body);
    Ok(out)
}

/// Decodes one complete frame. The header must describe exactly the bytes
/// that follow it.
pub fn decode_frame(bytes: &[u8]) -> Result<Decoded, LinkError> {
    if bytes.len() < 4 {
        return Err(LinkError::Framing(format!(
            "truncated header: {} of 4 bytes",
            bytes.len()
        )));
    }
    let len = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
    if len == 0 {
        return Err(LinkError::Framing("zero-length frame".into()));
    }
    if bytes.len() - 4 != len {
        return Err(LinkError::Framing(format!(
            "header says {len} bytes, body has {}",
            bytes.len() - 4
        )));
    }
    decode_body(&bytes[4..])
}

pub fn decode_body(body: &[u8]) -> Result<Decoded, LinkError> {
    let text = std::str::from_utf8(body)
        .map_err(|e| LinkError::Framing(format!("body is not UTF-8: {e}")))?;
    let json: Json = serde_json::from_str(text)
        .map_err(|e| LinkError::Framing(format!("body is not JSON: {e}")))?;
    let Json::Object(mut obj) = json else {
        return Err(LinkError::Framing("body is not a JSON object".into()));
    };
    let id = match obj.remove("id") {
        None | Some(Json::Null) => None,
        Some(v) => match v.as_u64() {
            Some(id) => Some(id),
            None => {
                return Ok(Decoded::Malformed {
                    id: None,
                    type_name: obj.get("type").and_then(Json::as_str).map(String::from),
                    reason: "\"id\" must be a non-negative integer".into(),
                })
            }
        },
    };
    let type_name = obj.get("type").and_then(Json::as_str).map(String::from);
    match serde_json::from_value::<Payload>(Json::Object(obj)) {
        Ok(payload) => Ok(Decoded::Message(Message { id, payload })),
        Err(e) => Ok(Decoded::Malformed {
            id,
            reason: match &type_name {
                Some(t) if !crate::message::TYPE_NAMES.contains(&t.as_str()) => {
                    format!("unknown message type `{t}`")
                }
                _ => format!("malformed message: {e}"),
            },
            type_name,
        }),
    }
}

/// Reads one frame body. `Ok(None)` means the peer closed cleanly between
/// frames; a close inside a frame is a framing error.
pub fn read_frame(r: &mut impl Read) -> Result<Option<Vec<u8>>, LinkError> {
    let mut header = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut header[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => {
                return Err(LinkError::Framing(format!(
                    "truncated header: {got} of 4 bytes"
                )))
            }
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = u32::from_be_bytes(header) as usize;
    if len == 0 {
        return Err(LinkError::Framing("zero-length frame".into()));
    }
    if len > MAX_BODY {
        return Err(LinkError::Framing(format!(
            "frame of {len} bytes is too large"
        )));
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            LinkError::Framing(format!("truncated body: expected {len} bytes"))
        } else {
            e.into()
        }
    })?;
    Ok(Some(body))
}

pub fn read_message(r: &mut impl Read) -> Result<Option<Decoded>, LinkError> {
    match read_frame(r)? {
        Some(body) => decode_body(&body).map(Some),
        None => Ok(None),
    }
}

pub fn write_message(w: &mut impl Write, m: &Message) -> Result<(), LinkError> {
    let frame = encode_frame(m)?;
    w.write_all(&frame)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::message::*;
    use crate::value::WireValue;

    #[test]
    fn resume_frame_bytes() {
        let frame = encode_frame(&Message::new(None, Payload::Resume)).unwrap();
        assert_eq!(&frame[..4], &[0, 0, 0, 0x11]);
        assert_eq!(&frame[4..], br#"{"type":"Resume"}"#);
        assert_eq!(frame.len(), 4 + 17);
    }

    #[test]
    fn type_then_id_then_fields() {
        let m = Message::new(
            Some(7),
            Payload::ReadField {
                obj_id: 3,
                field: "cap".into(),
            },
        );
        assert_eq!(
            encode_body(&m),
            br#"{"type":"ReadField","id":7,"objId":3,"field":"cap"}"#
        );
        match decode_frame(&encode_frame(&m).unwrap()).unwrap() {
            Decoded::Message(back) => assert_eq!(back, m),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn decoder_accepts_any_field_order() {
        let body = br#"{"field":"cap","objId":3,"id":2,"type":"ReadField"}"#;
        assert_eq!(
            decode_body(body).unwrap(),
            Decoded::Message(Message::new(
                Some(2),
                Payload::ReadField {
                    obj_id: 3,
                    field: "cap".into()
                }
            ))
        );
    }

    #[test]
    fn unknown_type_is_not_fatal() {
        match decode_body(br#"{"type":"Bogus","id":1}"#).unwrap() {
            Decoded::Malformed {
                id,
                type_name,
                reason,
            } => {
                assert_eq!(id, Some(1));
                assert_eq!(type_name.as_deref(), Some("Bogus"));
                assert!(reason.contains("unknown message type"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            decode_body(br#"{"type":"ReadField","id":1}"#).unwrap(),
            Decoded::Malformed { .. }
        ));
    }

    #[test]
    fn framing_errors() {
        assert!(decode_frame(&[0, 0]).is_err());
        assert!(decode_frame(&[0, 0, 0, 5, b'{', b'}']).is_err());
        assert!(decode_frame(&[0, 0, 0, 0]).is_err());
        assert!(decode_body(b"\xff\xfe").is_err());
        assert!(decode_body(b"{not json").is_err());
        assert!(decode_body(b"[1,2]").is_err());
    }

    #[test]
    fn oversized_body_refused() {
        assert!(header_for(u32::MAX as usize).is_ok());
        assert!(header_for(1usize << 32).is_err());
        assert!(header_for(0).is_err());
    }

    #[test]
    fn stream_reads() {
        let mut bytes = encode_frame(&Message::new(Some(1), Payload::Ok)).unwrap();
        bytes.extend(
            encode_frame(&Message::event_set(EventSet {
                suspend: false,
                events: vec![Event::VmDeath {
                    exit_status: 0,
                    entry_count: 2,
                    error: None,
                }],
            }))
            .unwrap(),
        );
        let mut cursor = std::io::Cursor::new(bytes);
        assert!(matches!(
            read_message(&mut cursor).unwrap(),
            Some(Decoded::Message(Message {
                payload: Payload::Ok,
                ..
            }))
        ));
        assert!(read_message(&mut cursor).unwrap().is_some());
        assert_eq!(read_message(&mut cursor).unwrap(), None);

        let mut truncated = std::io::Cursor::new(vec![0u8, 0]);
        assert!(matches!(
            read_frame(&mut truncated),
            Err(LinkError::Framing(_))
        ));
        let mut short_body = std::io::Cursor::new(vec![0u8, 0, 0, 9, b'{']);
        assert!(matches!(
            read_frame(&mut short_body),
            Err(LinkError::Framing(_))
        ));
    }

    #[test]
    fn event_field_names() {
        let set = EventSet {
            suspend: true,
            events: vec![Event::MethodEntry(MethodEvent {
                frame_id: 5,
                class: "BoundedStack".into(),
                method: "push".into(),
                this_id: Some(1),
                args: vec![WireValue::Int(4)],
                caller_class: "Main".into(),
                caller_method: "main".into(),
                caller_line: 12,
                return_value: None,
            })],
        };
        let body = String::from_utf8(encode_body(&Message::event_set(set))).unwrap();
        assert_eq!(
            body,
            r#"{"type":"EventSet","suspend":true,"events":[{"type":"MethodEntry","frameId":5,"class":"BoundedStack","method":"push","thisId":1,"args":[{"k":"int","v":4}],"callerClass":"Main","callerMethod":"main","callerLine":12}]}"#
        );
    }
}
