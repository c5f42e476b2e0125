//! In-VM debug agent: the target side of the wire protocol.
//!
//! The agent only touches the socket at safepoints (method entry and exit,
//! loop back-edges) and while the VM is suspended.

use std::collections::HashSet;
use std::io::{self, BufReader, ErrorKind, Write};
use std::net::{Ipv4Addr, Shutdown, TcpListener, TcpStream, ToSocketAddrs};
use std::thread;
use std::time::{Duration, Instant};

use mdwp::frame::{read_message, write_message, Decoded};
use mdwp::handshake::{acceptor_handshake, connector_handshake};
use mdwp::message::{
    ClassInfoBody, ErrorCode, Event, EventSet, FieldInfo, Message, MethodEvent, MethodInfo, Payload,
};
use mdwp::WireValue;

use crate::interp::Vm;
use crate::purity::{SEQ_MUTATORS, SEQ_READERS};
use crate::value::{digest_hex, HeapEntry, Value};

/// How long the VM keeps answering after announcing its death.
pub const DRAIN_TIMEOUT: Duration = Duration::from_secs(1);

#[derive(Debug)]
pub enum DebugMode {
    /// Listen on 127.0.0.1:port (0 picks a free port).
    Listen(u16),
    /// Dial a waiting debugger.
    Connect(String, u16),
    /// Accept on an already bound listener.
    Listener(TcpListener),
}

#[derive(Debug)]
pub struct DebugConfig {
    pub mode: DebugMode,
    pub suspend_on_start: bool,
}

/// Which activations produce events.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventPolicy {
    pub classes: HashSet<String>,
    pub entry: bool,
    pub exit: bool,
}

impl EventPolicy {
    fn wants(&self, class: &str) -> bool {
        self.classes.contains(class)
    }
}

/// What the agent should do after answering a request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Stay,
    Resume,
    Detach,
}

pub struct Agent {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    policy: EventPolicy,
    attached: bool,
    suspend_on_start: bool,
    entry_count: u64,
}

impl Agent {
    /// Establishes the connection and completes the handshake.
    pub fn connect(cfg: DebugConfig) -> io::Result<Agent> {
        let stream = match cfg.mode {
            DebugMode::Listen(port) => {
                let listener = TcpListener::bind((Ipv4Addr::LOCALHOST, port))?;
                // Launchers read the port from this line.
                eprintln!(
                    "minivm: listening on 127.0.0.1:{}",
                    listener.local_addr()?.port()
                );
                accept_debugger(listener)?
            }
            DebugMode::Listener(listener) => accept_debugger(listener)?,
            DebugMode::Connect(host, port) => dial_debugger(&host, port)?,
        };
        Agent::from_stream(stream, cfg.suspend_on_start)
    }

    /// Wraps a stream whose handshake is complete.
    pub fn from_stream(stream: TcpStream, suspend_on_start: bool) -> io::Result<Agent> {
        stream.set_nodelay(true)?;
        Ok(Agent {
            reader: BufReader::new(stream.try_clone()?),
            writer: stream,
            policy: EventPolicy::default(),
            attached: true,
            suspend_on_start,
            entry_count: 0,
        })
    }

    pub fn is_attached(&self) -> bool {
        self.attached
    }

    pub fn entry_count(&self) -> u64 {
        self.entry_count
    }

    fn detach(&mut self) {
        if self.attached {
            self.attached = false;
            let _ = self.writer.shutdown(Shutdown::Both);
        }
    }

    fn send(&mut self, m: &Message) -> bool {
        if write_message(&mut self.writer, m).is_err() {
            self.detach();
            return false;
        }
        true
    }

    fn send_events(&mut self, suspend: bool, events: Vec<Event>) -> bool {
        self.send(&Message::event_set(EventSet { suspend, events }))
    }

    pub(crate) fn start(&mut self, vm: &mut Vm) {
        let suspend = self.suspend_on_start;
        if self.send_events(suspend, vec![Event::VmStart]) && suspend {
            self.serve_suspended(vm);
        }
    }

    pub(crate) fn method_entry(&mut self, vm: &mut Vm, class: &str) {
        if self.policy.entry && self.policy.wants(class) {
            let ev = method_event(vm, class, None);
            self.entry_count += 1;
            if self.send_events(true, vec![Event::MethodEntry(ev)]) {
                self.serve_suspended(vm);
            }
        } else {
            self.poll(vm);
        }
    }

    pub(crate) fn method_exit(&mut self, vm: &mut Vm, class: &str, ret: &Value) {
        if self.policy.exit && self.policy.wants(class) {
            let ev = method_event(vm, class, Some(ret));
            if self.send_events(true, vec![Event::MethodExit(ev)]) {
                self.serve_suspended(vm);
            }
        } else {
            self.poll(vm);
        }
    }

    /// Announces termination, then answers stragglers briefly so a debugger
    /// blocked in a request is not left hanging.
    pub(crate) fn finish(&mut self, _vm: &mut Vm, status: i32, error: Option<String>) {
        let death = Event::VmDeath {
            exit_status: status,
            entry_count: self.entry_count,
            error,
        };
        if !self.send_events(false, vec![death]) {
            return;
        }
        let deadline = Instant::now() + DRAIN_TIMEOUT;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() || self.reader.get_ref().set_read_timeout(Some(left)).is_err() {
                break;
            }
            match read_message(&mut self.reader) {
                Ok(Some(Decoded::Message(m))) => {
                    let done = matches!(m.payload, Payload::Disconnect);
                    let reply = if done {
                        Payload::Ok
                    } else {
                        Payload::error(ErrorCode::NotSuspended, "target VM has terminated")
                    };
                    if !self.send(&Message::new(m.id, reply)) || done {
                        break;
                    }
                }
                Ok(Some(Decoded::Malformed { id, reason, .. })) => {
                    if !self.send(&Message::new(
                        id,
                        Payload::error(ErrorCode::UnknownType, reason),
                    )) {
                        break;
                    }
                }
                _ => break,
            }
        }
        self.detach();
    }

    /// Services at most one pending request while the VM is running.
    pub(crate) fn poll(&mut self, vm: &mut Vm) {
        if !self.attached || !self.has_input() {
            return;
        }
        match read_message(&mut self.reader) {
            Ok(Some(Decoded::Message(m))) => {
                let reply = match m.payload {
                    Payload::Suspend => {
                        if self.send(&Message::new(m.id, Payload::Ok)) {
                            self.serve_suspended(vm);
                        }
                        return;
                    }
                    Payload::Disconnect => {
                        self.send(&Message::new(m.id, Payload::Ok));
                        self.detach();
                        return;
                    }
                    p if p.is_command() => {
                        Payload::error(ErrorCode::NotSuspended, "target VM is running")
                    }
                    p => unexpected(&p),
                };
                self.send(&Message::new(m.id, reply));
            }
            Ok(Some(Decoded::Malformed { id, reason, .. })) => {
                self.send(&Message::new(
                    id,
                    Payload::error(ErrorCode::UnknownType, reason),
                ));
            }
            Ok(None) | Err(_) => self.detach(),
        }
    }

    fn has_input(&mut self) -> bool {
        if !self.reader.buffer().is_empty() {
            return true;
        }
        let stream = self.reader.get_ref();
        if stream.set_nonblocking(true).is_err() {
            return false;
        }
        let mut probe = [0u8; 1];
        let ready = match stream.peek(&mut probe) {
            Ok(_) => true,
            Err(e) => e.kind() != ErrorKind::WouldBlock,
        };
        let _ = stream.set_nonblocking(false);
        ready
    }

    /// Blocks answering requests until Resume or Disconnect.
    fn serve_suspended(&mut self, vm: &mut Vm) {
        while self.attached {
            let (id, reply, control) = match read_message(&mut self.reader) {
                Ok(Some(Decoded::Message(m))) => {
                    let (reply, control) = handle_request(vm, &mut self.policy, m.payload);
                    (m.id, reply, control)
                }
                Ok(Some(Decoded::Malformed { id, reason, .. })) => (
                    id,
                    Payload::error(ErrorCode::UnknownType, reason),
                    Control::Stay,
                ),
                Ok(None) | Err(_) => {
                    self.detach();
                    return;
                }
            };
            if !self.send(&Message::new(id, reply)) {
                return;
            }
            match control {
                Control::Stay => {}
                Control::Resume => return,
                Control::Detach => {
                    self.detach();
                    return;
                }
            }
        }
    }
}

fn unexpected(p: &Payload) -> Payload {
    Payload::error(
        ErrorCode::UnknownType,
        format!("{} is not a command", p.type_name()),
    )
}

fn accept_debugger(listener: TcpListener) -> io::Result<TcpStream> {
    loop {
        let (mut stream, peer) = listener.accept()?;
        match acceptor_handshake(&mut stream) {
            Ok(()) => return Ok(stream),
            Err(e) => eprintln!("minivm: rejected debugger at {peer}: {e}"),
        }
    }
}

fn dial_debugger(host: &str, port: u16) -> io::Result<TcpStream> {
    let addr = (host, port)
        .to_socket_addrs()?
        .next()
        .ok_or_else(|| io::Error::new(ErrorKind::NotFound, format!("cannot resolve {host}")))?;
    let deadline = Instant::now() + Duration::from_secs(5);
    let mut stream = loop {
        match TcpStream::connect(addr) {
            Ok(s) => break s,
            Err(e) if Instant::now() >= deadline => return Err(e),
            Err(_) => thread::sleep(Duration::from_millis(50)),
        }
    };
    connector_handshake(&mut stream).map_err(io::Error::other)?;
    stream.flush()?;
    Ok(stream)
}

fn method_event(vm: &Vm, class: &str, ret: Option<&Value>) -> MethodEvent {
    let f = vm.current().expect("event inside an activation");
    MethodEvent {
        frame_id: f.frame_id,
        class: class.into(),
        method: f.method.clone(),
        this_id: match &f.receiver {
            Some(Value::Ref { id, .. }) => Some(*id),
            _ => None,
        },
        args: f.args.iter().map(to_wire).collect(),
        caller_class: f.caller.0.clone(),
        caller_method: f.caller.1.clone(),
        caller_line: f.caller.2,
        return_value: ret.map(to_wire),
    }
}

pub fn to_wire(v: &Value) -> WireValue {
    match v {
        Value::Int(i) => WireValue::Int(*i),
        Value::Real(r) => WireValue::Real(*r),
        Value::Bool(b) => WireValue::Bool(*b),
        Value::Str(s) => WireValue::Str(s.clone()),
        Value::Null => WireValue::Null,
        Value::Ref { id, class } => WireValue::Ref {
            id: *id,
            class: class.clone(),
        },
        Value::Seq(id) => WireValue::Seq { id: *id },
    }
}

#[allow(clippy::result_large_err)]
fn from_wire(vm: &Vm, v: WireValue) -> Result<Value, Payload> {
    let unknown = |id| Payload::error(ErrorCode::UnknownObject, format!("no object with id {id}"));
    Ok(match v {
        WireValue::Int(i) => Value::Int(i),
        WireValue::Real(r) => Value::Real(r),
        WireValue::Bool(b) => Value::Bool(b),
        WireValue::Str(s) => Value::Str(s),
        WireValue::Null => Value::Null,
        WireValue::Ref { id, .. } => match vm.heap().object(id) {
            Some(o) => Value::Ref {
                id,
                class: o.class.clone(),
            },
            None => return Err(unknown(id)),
        },
        WireValue::Seq { id } => match vm.heap().seq(id) {
            Some(_) => Value::Seq(id),
            None => return Err(unknown(id)),
        },
    })
}

/// Answers one request received while the VM is suspended.
pub fn handle_request(vm: &mut Vm, policy: &mut EventPolicy, req: Payload) -> (Payload, Control) {
    let reply = match req {
        Payload::ListClasses => {
            let p = vm.program();
            let classes = p
                .classes
                .iter()
                .map(|c| c.name.clone())
                .chain(p.interfaces.iter().map(|i| i.name.clone()))
                .collect();
            Payload::ClassList { classes }
        }
        Payload::ClassInfo { class } => class_info(vm, &class),
        Payload::SetEventPolicy {
            classes,
            entry,
            exit,
        } => {
            *policy = EventPolicy {
                classes: classes.into_iter().collect(),
                entry,
                exit,
            };
            Payload::Ok
        }
        Payload::Resume => return (Payload::Ok, Control::Resume),
        Payload::Disconnect => return (Payload::Ok, Control::Detach),
        Payload::Suspend => Payload::Ok,
        Payload::ReadField { obj_id, field } => match vm.heap().get(obj_id) {
            Some(HeapEntry::Object(o)) => match o.field(&field) {
                Some(v) => Payload::ValueReply { value: to_wire(v) },
                None => Payload::error(
                    ErrorCode::UnknownField,
                    format!("{} has no field {field}", o.class),
                ),
            },
            _ => Payload::error(
                ErrorCode::UnknownObject,
                format!("no object with id {obj_id}"),
            ),
        },
        Payload::ReadSeq { seq_id } => match vm.heap().seq(seq_id) {
            Some(items) => Payload::SeqReply {
                elements: items.iter().map(to_wire).collect(),
            },
            None => Payload::error(
                ErrorCode::UnknownObject,
                format!("no sequence with id {seq_id}"),
            ),
        },
        Payload::InvokeMethod {
            obj_id,
            method,
            args,
        } => invoke(vm, obj_id, &method, args),
        Payload::HeapDigest => Payload::DigestReply {
            hex64: digest_hex(vm.heap_digest()),
        },
        other => unexpected(&other),
    };
    (reply, Control::Stay)
}

fn class_info(vm: &Vm, name: &str) -> Payload {
    let p = vm.program();
    if let Some(c) = p.class(name) {
        let fields = p
            .all_fields(name)
            .into_iter()
            .map(|(f, _)| FieldInfo {
                name: f.name.clone(),
                visibility: f.visibility.as_str().into(),
            })
            .collect();
        let methods = p
            .all_methods(name)
            .into_iter()
            .map(|r| MethodInfo {
                name: r.def.name.clone(),
                params: r.def.params.clone(),
                pure: r.def.pure,
                visibility: r.def.visibility.as_str().into(),
                declaring: r.declaring.into(),
            })
            .collect();
        return Payload::ClassInfoReply(ClassInfoBody {
            name: c.name.clone(),
            base: c.base.clone(),
            interfaces: c.interfaces.clone(),
            fields,
            methods,
            is_interface: false,
        });
    }
    if let Some(i) = p.interface(name) {
        return Payload::ClassInfoReply(ClassInfoBody {
            name: i.name.clone(),
            base: None,
            interfaces: i.extends.clone(),
            fields: Vec::new(),
            methods: i
                .methods
                .iter()
                .map(|m| MethodInfo {
                    name: m.name.clone(),
                    params: m.params.clone(),
                    pure: m.pure,
                    visibility: "public".into(),
                    declaring: i.name.clone(),
                })
                .collect(),
            is_interface: true,
        });
    }
    Payload::error(ErrorCode::UnknownClass, format!("unknown class {name}"))
}

fn invoke(vm: &mut Vm, obj_id: u64, method: &str, args: Vec<WireValue>) -> Payload {
    let receiver = match vm.heap().get(obj_id) {
        Some(HeapEntry::Object(o)) => {
            let class = o.class.clone();
            let Some(r) = vm.program().resolve(&class, method) else {
                return Payload::error(
                    ErrorCode::UnknownMethod,
                    format!("unknown method {class}.{method}"),
                );
            };
            if !r.def.pure {
                return Payload::error(
                    ErrorCode::Purity,
                    format!("{}.{method} is not pure", r.declaring),
                );
            }
            if r.def.params.len() != args.len() {
                return Payload::error(
                    ErrorCode::Arity,
                    format!(
                        "{}.{method} expects {} arguments, got {}",
                        r.declaring,
                        r.def.params.len(),
                        args.len()
                    ),
                );
            }
            Value::Ref { id: obj_id, class }
        }
        Some(HeapEntry::Seq(_)) => {
            if SEQ_MUTATORS.contains(&method) {
                return Payload::error(ErrorCode::Purity, format!("sequence {method} is not pure"));
            }
            if !SEQ_READERS.contains(&method) {
                return Payload::error(
                    ErrorCode::UnknownMethod,
                    format!("unknown sequence method {method}"),
                );
            }
            let want = if method == "get" { 1 } else { 0 };
            if args.len() != want {
                return Payload::error(
                    ErrorCode::Arity,
                    format!("{method} expects {want} arguments, got {}", args.len()),
                );
            }
            Value::Seq(obj_id)
        }
        None => {
            return Payload::error(
                ErrorCode::UnknownObject,
                format!("no object with id {obj_id}"),
            )
        }
    };
    let mut values = Vec::with_capacity(args.len());
    for a in args {
        match from_wire(vm, a) {
            Ok(v) => values.push(v),
            Err(e) => return e,
        }
    }
    match vm.invoke_pure(&receiver, method, values) {
        Ok(v) => Payload::ValueReply { value: to_wire(&v) },
        Err(e) => Payload::error(ErrorCode::TargetException, e.to_string()),
    }
}
