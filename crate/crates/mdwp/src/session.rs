//! Auditor side of a debug connection: connectors, lockstep requests and the
//! event queue.

use std::collections::{HashMap, VecDeque};
use std::io::{BufRead, BufReader, BufWriter};
use std::net::{Ipv4Addr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::PathBuf;
use std::process::{Child, Command, ExitStatus, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use crate::error::{LinkError, Result};
use crate::frame::{read_message, write_message, Decoded};
use crate::handshake::{acceptor_handshake, connector_handshake};
use crate::message::{ErrorCode, EventSet, Message, Payload};
use crate::mirror::{ClassMirror, MethodMirror, ObjectMirror, SeqMirror, ValueMirror};
use crate::value::WireValue;

pub const CONNECT_TIMEOUT: Duration = Duration::from_secs(5);
pub const CONNECT_RETRY: Duration = Duration::from_millis(50);

static NEXT_SERIAL: AtomicU64 = AtomicU64::new(1);

/// Where a launched VM's standard output goes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LaunchOutput {
    Inherit,
    /// Forwarded to this process's stderr, keeping stdout free for reports.
    Stderr,
    File(PathBuf),
    Null,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConnectorConfig {
    /// Spawn `vm run --debug-listen <port> --suspend <program>` and dial it.
    /// `None` lets the VM pick a free port and report it on stderr.
    Launch {
        vm: PathBuf,
        program: PathBuf,
        port: Option<u16>,
        vm_stdout: LaunchOutput,
    },
    /// Dial a VM that is already listening.
    Attach { host: String, port: u16 },
    /// Wait for a VM started with `--debug-connect` to dial us.
    Listen { port: u16 },
}

pub fn open_session(cfg: &ConnectorConfig) -> Result<Session> {
    match cfg {
        ConnectorConfig::Launch {
            vm,
            program,
            port,
            vm_stdout,
        } => Session::launch(vm, program, *port, vm_stdout),
        ConnectorConfig::Attach { host, port } => Session::attach(host, *port),
        ConnectorConfig::Listen { port } => SessionListener::bind(*port)?.accept(),
    }
}

/// A bound listening connector. Split from `accept` so callers can learn the
/// port before the VM is started.
pub struct SessionListener {
    listener: TcpListener,
}

impl SessionListener {
    pub fn bind(port: u16) -> Result<Self> {
        let listener = TcpListener::bind((Ipv4Addr::LOCALHOST, port))
            .map_err(|e| LinkError::Io(with_context(e, &format!("bind 127.0.0.1:{port}"))))?;
        Ok(SessionListener { listener })
    }

    pub fn local_port(&self) -> u16 {
        self.listener.local_addr().map(|a| a.port()).unwrap_or(0)
    }

    /// Accepts one VM connection and runs the acceptor handshake.
    pub fn accept(self) -> Result<Session> {
        let (mut stream, _) = self.listener.accept()?;
        acceptor_handshake(&mut stream)?;
        Session::start(stream, None)
    }
}

fn with_context(e: std::io::Error, what: &str) -> std::io::Error {
    std::io::Error::new(e.kind(), format!("{what}: {e}"))
}

/// One debug session. Requests are strictly lockstep; event sets that arrive
/// while waiting for a reply are queued in arrival order.
pub struct Session {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    serial: u64,
    next_id: u64,
    queue: VecDeque<EventSet>,
    suspended: bool,
    death_received: bool,
    death_delivered: bool,
    dead: Option<String>,
    classes: HashMap<String, ClassMirror>,
    child: Option<Child>,
    warnings: Vec<String>,
}

impl Session {
    pub fn attach(host: &str, port: u16) -> Result<Session> {
        let addr = (host, port)
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| LinkError::Protocol(format!("cannot resolve {host}")))?;
        let mut stream = TcpStream::connect(addr)
            .map_err(|e| LinkError::Io(with_context(e, &format!("connect {host}:{port}"))))?;
        connector_handshake(&mut stream)?;
        Session::start(stream, None)
    }

    pub fn launch(
        vm: &std::path::Path,
        program: &std::path::Path,
        port: Option<u16>,
        vm_stdout: &LaunchOutput,
    ) -> Result<Session> {
        let stdout = match vm_stdout {
            LaunchOutput::Inherit => Stdio::inherit(),
            LaunchOutput::Stderr => Stdio::from(std::io::stderr()),
            LaunchOutput::Null => Stdio::null(),
            LaunchOutput::File(p) => Stdio::from(
                std::fs::File::create(p)
                    .map_err(|e| LinkError::Spawn(format!("{}: {e}", p.display())))?,
            ),
        };
        let mut child = Command::new(vm)
            .arg("run")
            .arg("--debug-listen")
            .arg(port.unwrap_or(0).to_string())
            .arg("--suspend")
            .arg(program)
            .stdin(Stdio::null())
            .stdout(stdout)
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| LinkError::Spawn(format!("{}: {e}", vm.display())))?;

        // The VM announces its port on stderr; everything else it writes
        // there is passed through.
        let (tx, rx) = mpsc::channel();
        let err = child.stderr.take().expect("stderr is piped");
        thread::spawn(move || {
            let mut tx = Some(tx);
            for line in BufReader::new(err).lines() {
                let Ok(line) = line else { break };
                if let Some(p) = tx.as_ref().and_then(|_| announced_port(&line)) {
                    let _ = tx.take().unwrap().send(p);
                    continue;
                }
                eprintln!("{line}");
            }
        });

        let deadline = Instant::now() + CONNECT_TIMEOUT;
        let port = match port {
            Some(p) => p,
            None => match rx.recv_timeout(CONNECT_TIMEOUT) {
                Ok(p) => p,
                Err(_) => {
                    kill(&mut child);
                    return Err(LinkError::Spawn(
                        "VM did not report a listening port".into(),
                    ));
                }
            },
        };
        let mut stream = loop {
            match TcpStream::connect((Ipv4Addr::LOCALHOST, port)) {
                Ok(s) => break s,
                Err(e) => {
                    if let Ok(Some(status)) = child.try_wait() {
                        return Err(LinkError::Spawn(format!("VM exited early with {status}")));
                    }
                    if Instant::now() >= deadline {
                        kill(&mut child);
                        return Err(LinkError::Io(with_context(
                            e,
                            &format!("connect 127.0.0.1:{port}"),
                        )));
                    }
                    thread::sleep(CONNECT_RETRY);
                }
            }
        };
        if let Err(e) = connector_handshake(&mut stream) {
            kill(&mut child);
            return Err(e);
        }
        Session::start(stream, Some(child))
    }

    /// Wraps a stream whose handshake is done and waits for the VM's first
    /// event set, which decides whether the session starts suspended.
    pub fn start(stream: TcpStream, child: Option<Child>) -> Result<Session> {
        stream.set_nodelay(true)?;
        let mut session = Session {
            reader: BufReader::new(stream.try_clone()?),
            writer: BufWriter::new(stream),
            serial: NEXT_SERIAL.fetch_add(1, Ordering::Relaxed),
            next_id: 1,
            queue: VecDeque::new(),
            suspended: false,
            death_received: false,
            death_delivered: false,
            dead: None,
            classes: HashMap::new(),
            child,
            warnings: Vec::new(),
        };
        match session.read_incoming()? {
            Incoming::Events(set) => session.queue.push_back(set),
            Incoming::Reply(m) => {
                return Err(LinkError::Protocol(format!(
                    "expected VmStart, got {}",
                    m.payload.type_name()
                )))
            }
        }
        Ok(session)
    }

    pub fn serial(&self) -> u64 {
        self.serial
    }

    pub fn is_suspended(&self) -> bool {
        self.suspended
    }

    pub fn is_dead(&self) -> bool {
        self.dead.is_some()
    }

    pub fn take_warnings(&mut self) -> Vec<String> {
        std::mem::take(&mut self.warnings)
    }

    /// Sends one command and blocks for its reply. Error replies become
    /// `LinkError::Remote`.
    pub fn request(&mut self, payload: Payload) -> Result<Payload> {
        if let Some(why) = &self.dead {
            return Err(LinkError::SessionDead(why.clone()));
        }
        if self.death_received {
            return Err(LinkError::SessionDead("target VM has terminated".into()));
        }
        let id = self.next_id;
        self.next_id += 1;
        let msg = Message::new(Some(id), payload);
        if let Err(e) = write_message(&mut self.writer, &msg) {
            return Err(self.kill_session(e));
        }
        loop {
            match self.read_incoming()? {
                Incoming::Events(set) => self.queue.push_back(set),
                Incoming::Reply(reply) => {
                    if reply.id != Some(id) {
                        let e = LinkError::Protocol(format!(
                            "reply id {:?} does not match request id {id}",
                            reply.id
                        ));
                        return Err(self.kill_session(e));
                    }
                    return match reply.payload {
                        Payload::Error { code, msg } => Err(LinkError::Remote { code, msg }),
                        other => Ok(other),
                    };
                }
            }
        }
    }

    /// Blocks for the next event set. Returns `None` once the set carrying
    /// `VmDeath` has been delivered.
    pub fn next_event_set(&mut self) -> Result<Option<EventSet>> {
        if let Some(set) = self.queue.pop_front() {
            return Ok(Some(self.deliver(set)));
        }
        if self.death_delivered {
            return Ok(None);
        }
        if let Some(why) = &self.dead {
            return Err(LinkError::SessionDead(why.clone()));
        }
        loop {
            match self.read_incoming()? {
                Incoming::Events(set) => return Ok(Some(self.deliver(set))),
                Incoming::Reply(m) => self.warnings.push(format!(
                    "ignoring unsolicited {} reply",
                    m.payload.type_name()
                )),
            }
        }
    }

    fn deliver(&mut self, set: EventSet) -> EventSet {
        if set.is_death() {
            self.death_delivered = true;
        }
        set
    }

    fn read_incoming(&mut self) -> Result<Incoming> {
        let decoded = match read_message(&mut self.reader) {
            Ok(Some(d)) => d,
            Ok(None) => {
                let e = LinkError::SessionDead("connection closed by target VM".into());
                return Err(self.kill_session(e));
            }
            Err(e) => return Err(self.kill_session(e)),
        };
        match decoded {
            Decoded::Message(Message {
                payload: Payload::EventSet(set),
                ..
            }) => {
                if set.events.is_empty() {
                    return Err(self.kill_session(LinkError::Protocol("empty event set".into())));
                }
                if set.is_death() {
                    self.death_received = true;
                    self.suspended = false;
                } else if set.suspend {
                    self.suspended = true;
                }
                Ok(Incoming::Events(set))
            }
            Decoded::Message(m) if m.payload.is_reply() => Ok(Incoming::Reply(m)),
            Decoded::Message(m) => Err(self.kill_session(LinkError::Protocol(format!(
                "unexpected {} from target VM",
                m.payload.type_name()
            )))),
            Decoded::Malformed { reason, .. } => {
                Err(self.kill_session(LinkError::Protocol(reason)))
            }
        }
    }

    fn kill_session(&mut self, e: LinkError) -> LinkError {
        if self.dead.is_none() {
            self.dead = Some(e.to_string());
        }
        e
    }

    fn expect_ok(&mut self, payload: Payload) -> Result<()> {
        match self.request(payload)? {
            Payload::Ok => Ok(()),
            other => Err(unexpected("Ok", &other)),
        }
    }

    pub fn resume_all(&mut self) -> Result<()> {
        if !self.suspended {
            self.warnings
                .push("resume requested while the VM is not suspended".into());
            return Ok(());
        }
        match self.expect_ok(Payload::Resume) {
            Ok(()) => {
                self.suspended = false;
                Ok(())
            }
            Err(LinkError::Remote {
                code: ErrorCode::NotSuspended,
                ..
            }) => {
                self.suspended = false;
                self.warnings
                    .push("resume requested while the VM is not suspended".into());
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    /// Asks a running VM to halt at its next safepoint.
    pub fn suspend(&mut self) -> Result<()> {
        self.expect_ok(Payload::Suspend)?;
        self.suspended = true;
        Ok(())
    }

    pub fn set_event_policy(
        &mut self,
        classes: Vec<String>,
        entry: bool,
        exit: bool,
    ) -> Result<()> {
        self.expect_ok(Payload::SetEventPolicy {
            classes,
            entry,
            exit,
        })
    }

    /// Detaches; the VM runs on without a debugger.
    pub fn disconnect(&mut self) -> Result<()> {
        let r = self.expect_ok(Payload::Disconnect);
        self.suspended = false;
        self.dead
            .get_or_insert_with(|| "session was disconnected".into());
        r
    }

    pub fn list_classes(&mut self) -> Result<Vec<String>> {
        match self.request(Payload::ListClasses)? {
            Payload::ClassList { classes } => Ok(classes),
            other => Err(unexpected("ClassList", &other)),
        }
    }

    /// Class descriptor, fetched once per session.
    pub fn class(&mut self, name: &str) -> Result<&ClassMirror> {
        if !self.classes.contains_key(name) {
            let body = match self.request(Payload::ClassInfo { class: name.into() })? {
                Payload::ClassInfoReply(b) => b,
                other => return Err(unexpected("ClassInfoReply", &other)),
            };
            self.classes.insert(name.into(), ClassMirror::from(body));
        }
        Ok(&self.classes[name])
    }

    pub fn get_field(&mut self, obj: &ObjectMirror, field: &str) -> Result<ValueMirror> {
        self.own(obj.session)?;
        match self.request(Payload::ReadField {
            obj_id: obj.id,
            field: field.into(),
        })? {
            Payload::ValueReply { value } => Ok(self.mirror(value)),
            other => Err(unexpected("ValueReply", &other)),
        }
    }

    pub fn seq_snapshot(&mut self, seq: &SeqMirror) -> Result<Vec<ValueMirror>> {
        self.own(seq.session)?;
        match self.request(Payload::ReadSeq { seq_id: seq.id })? {
            Payload::SeqReply { elements } => {
                Ok(elements.into_iter().map(|v| self.mirror(v)).collect())
            }
            other => Err(unexpected("SeqReply", &other)),
        }
    }

    /// Invokes a pure method with events suppressed. The VM refuses impure
    /// targets with `PURITY` regardless of what the mirror says.
    pub fn invoke_pure(
        &mut self,
        obj: &ObjectMirror,
        method: &MethodMirror,
        args: &[ValueMirror],
    ) -> Result<ValueMirror> {
        self.own(obj.session)?;
        let mut wire = Vec::with_capacity(args.len());
        for a in args {
            match a {
                ValueMirror::Ref(o) => self.own(o.session)?,
                ValueMirror::Seq(s) => self.own(s.session)?,
                _ => {}
            }
            wire.push(a.to_wire().ok_or_else(|| {
                LinkError::Protocol("sequence snapshots cannot be passed to the VM".into())
            })?);
        }
        match self.request(Payload::InvokeMethod {
            obj_id: obj.id,
            method: method.name.clone(),
            args: wire,
        })? {
            Payload::ValueReply { value } => Ok(self.mirror(value)),
            other => Err(unexpected("ValueReply", &other)),
        }
    }

    pub fn heap_digest(&mut self) -> Result<String> {
        match self.request(Payload::HeapDigest)? {
            Payload::DigestReply { hex64 } => Ok(hex64),
            other => Err(unexpected("DigestReply", &other)),
        }
    }

    pub fn mirror(&self, v: WireValue) -> ValueMirror {
        ValueMirror::from_wire(v, self.serial)
    }

    /// Mirror for the receiver named in a method event.
    pub fn object(&self, id: u64, class: &str) -> ObjectMirror {
        ObjectMirror {
            id,
            class: class.into(),
            session: self.serial,
        }
    }

    fn own(&self, session: u64) -> Result<()> {
        if session == self.serial {
            Ok(())
        } else {
            Err(LinkError::ForeignMirror)
        }
    }

    /// Waits for a launched VM to exit, forcing it after `timeout`.
    /// Returns `None` for sessions that did not spawn their VM.
    pub fn finish(&mut self, timeout: Duration) -> Option<ExitStatus> {
        let mut child = self.child.take()?;
        // A VM that has announced its death lingers until we hang up.
        let _ = self.writer.get_ref().shutdown(std::net::Shutdown::Both);
        let deadline = Instant::now() + timeout;
        loop {
            match child.try_wait() {
                Ok(Some(status)) => return Some(status),
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(10)),
                _ => {
                    kill(&mut child);
                    return child.wait().ok();
                }
            }
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        if let Some(child) = self.child.as_mut() {
            kill(child);
        }
    }
}

enum Incoming {
    Events(EventSet),
    Reply(Message),
}

fn unexpected(wanted: &str, got: &Payload) -> LinkError {
    LinkError::Protocol(format!("expected {wanted}, got {}", got.type_name()))
}

fn kill(child: &mut Child) {
    if let Ok(None) = child.try_wait() {
        let _ = child.kill();
    }
    let _ = child.wait();
}

/// Parses the VM's "minivm: listening on 127.0.0.1:PORT" announcement.
pub fn announced_port(line: &str) -> Option<u16> {
    let rest = line.split("listening on ").nth(1)?;
    rest.trim().rsplit(':').next()?.parse().ok()
}
