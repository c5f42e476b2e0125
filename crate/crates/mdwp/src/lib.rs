//! MDWP: a length-prefixed JSON debug wire protocol between an auditor and
//! a target VM, plus the auditor-side session and mirror layer.

pub mod error;
pub mod frame;
pub mod handshake;
pub mod message;
pub mod mirror;
pub mod session;
pub mod value;

pub use error::{LinkError, Result};
pub use frame::{
    decode_body, decode_frame, encode_body, encode_frame, read_message, write_message, Decoded,
};
pub use handshake::{acceptor_handshake, connector_handshake, MAGIC};
pub use message::{
    ClassInfoBody, ErrorCode, Event, EventSet, FieldInfo, Message, MethodEvent, MethodInfo, Payload,
};
pub use mirror::{
    ClassMirror, FieldMirror, MethodMirror, ObjectMirror, SeqMirror, ValueMirror, Visibility,
};
pub use session::{open_session, ConnectorConfig, LaunchOutput, Session, SessionListener};
pub use value::WireValue;
