use std::net::{Ipv4Addr, TcpListener, TcpStream};
use std::path::PathBuf;
use std::thread::{self, JoinHandle};

use mdwp::{
    connector_handshake, read_message, write_message, Decoded, ErrorCode, Event, EventSet,
    LinkError, Message, Payload, Session, ValueMirror, WireValue,
};
use minivm::{load_program, DebugConfig, DebugMode, Vm};

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

/// Starts a suspended VM on a free port; returns the port and the VM thread,
/// which yields the exit status and the VM for post-mortem checks.
fn spawn_vm(src: &str) -> (u16, JoinHandle<(i32, Vm)>) {
    let program = load_program(src).unwrap();
    let listener = TcpListener::bind((Ipv4Addr::LOCALHOST, 0)).unwrap();
    let port = listener.local_addr().unwrap().port();
    let handle = thread::spawn(move || {
        let agent = minivm::Agent::connect(DebugConfig {
            mode: DebugMode::Listener(listener),
            suspend_on_start: true,
        })
        .unwrap();
        let mut vm = Vm::new(program);
        vm.set_output(Box::new(std::io::sink()));
        vm.attach(agent);
        let status = if vm.run_main().is_ok() { 0 } else { 4 };
        (status, vm)
    });
    (port, handle)
}

fn attach(src: &str) -> (Session, JoinHandle<(i32, Vm)>) {
    let (port, vm) = spawn_vm(src);
    let mut session = Session::attach("127.0.0.1", port).unwrap();
    assert!(session.is_suspended());
    let start = session.next_event_set().unwrap().unwrap();
    assert_eq!(start.events, [Event::VmStart]);
    (session, vm)
}

fn remote_code(e: LinkError) -> ErrorCode {
    e.code()
        .cloned()
        .unwrap_or_else(|| panic!("not a remote error: {e}"))
}

/// Events from every set until VM death, resuming after each set.
fn drain(session: &mut Session) -> (Vec<Event>, u64) {
    let mut events = Vec::new();
    loop {
        let Some(set) = session.next_event_set().unwrap() else {
            panic!("death never reported");
        };
        for e in set.events {
            if let Event::VmDeath { entry_count, .. } = e {
                return (events, entry_count);
            }
            events.push(e);
        }
        session.resume_all().unwrap();
    }
}

#[test]
fn entry_and_exit_events_nest_through_recursion() {
    let src = "class Acc { var total;
                 def init() { total = 0; }
                 def addDown(n) { if (n == 0) { return total; } total = total + n; return self.addDown(n - 1); } }
               main { var a = new Acc(); print(a.addDown(6)); }";
    let (mut s, vm) = attach(src);
    s.set_event_policy(vec!["Acc".into()], true, true).unwrap();
    s.resume_all().unwrap();
    let (events, entry_count) = drain(&mut s);
    let mut stack = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut entries = 0;
    for e in &events {
        match e {
            Event::MethodEntry(m) => {
                entries += 1;
                assert!(seen.insert(m.frame_id), "frame ids are unique");
                assert!(m.return_value.is_none());
                stack.push(m.frame_id);
            }
            Event::MethodExit(m) => {
                assert_eq!(
                    stack.pop(),
                    Some(m.frame_id),
                    "exits pair with the latest entry"
                );
                assert!(m.return_value.is_some());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
    assert!(stack.is_empty());
    // init + 7 activations of addDown
    assert_eq!(entries, 8);
    assert_eq!(entry_count, 8);
    let Event::MethodExit(last) = events.last().unwrap() else {
        panic!()
    };
    assert_eq!(last.method, "addDown");
    assert_eq!(last.return_value, Some(WireValue::Int(21)));
    let Event::MethodEntry(second) = &events[2] else {
        panic!()
    };
    assert_eq!(
        (second.caller_class.as_str(), second.caller_method.as_str()),
        ("Main", "main")
    );
    let Event::MethodEntry(inner) = &events[3] else {
        panic!()
    };
    assert_eq!(
        (inner.caller_class.as_str(), inner.caller_method.as_str()),
        ("Acc", "addDown")
    );
    assert_eq!(vm.join().unwrap().0, 0);
}

#[test]
fn inspection_and_pure_invocation_while_suspended() {
    let src = fixture("bounded_stack.mob")
        + "main { var s = new BoundedStack(3); s.push(7); s.push(8); s.pop(); }";
    let (mut s, vm) = attach(&src);
    s.set_event_policy(vec!["BoundedStack".into()], true, false)
        .unwrap();
    s.resume_all().unwrap();
    // init, push(7), push(8): stop at the second push.
    let mut target = None;
    for _ in 0..3 {
        let set = s.next_event_set().unwrap().unwrap();
        if let Some(Event::MethodEntry(m)) = set.events.first() {
            target = Some((m.this_id.unwrap(), m.method.clone(), m.args.clone()));
        }
        if target
            .as_ref()
            .is_some_and(|t| t.1 == "push" && t.2 == [WireValue::Int(8)])
        {
            break;
        }
        s.resume_all().unwrap();
    }
    let (id, method, _) = target.unwrap();
    assert_eq!(method, "push");
    let obj = s.object(id, "BoundedStack");

    assert_eq!(
        s.get_field(&obj, "cap").unwrap().to_wire(),
        Some(WireValue::Int(3))
    );
    let ValueMirror::Seq(v) = s.get_field(&obj, "v").unwrap() else {
        panic!()
    };
    let items: Vec<_> = s
        .seq_snapshot(&v)
        .unwrap()
        .iter()
        .map(|m| m.to_wire())
        .collect();
    assert_eq!(items, [Some(WireValue::Int(7))]);

    let before = s.heap_digest().unwrap();
    assert_eq!(before.len(), 16);
    let class = s.class("BoundedStack").unwrap().clone();
    for name in ["size", "peek", "empty", "capacity"] {
        let m = class.method(name).unwrap().clone();
        s.invoke_pure(&obj, &m, &[]).unwrap();
        assert_eq!(s.heap_digest().unwrap(), before, "{name}");
    }
    let size = class.method("size").unwrap().clone();
    assert_eq!(
        s.invoke_pure(&obj, &size, &[]).unwrap().to_wire(),
        Some(WireValue::Int(1))
    );

    let push = Payload::InvokeMethod {
        obj_id: id,
        method: "push".into(),
        args: vec![WireValue::Int(1)],
    };
    assert_eq!(remote_code(s.request(push).unwrap_err()), ErrorCode::Purity);
    let bad_arity = Payload::InvokeMethod {
        obj_id: id,
        method: "size".into(),
        args: vec![WireValue::Int(1)],
    };
    assert_eq!(
        remote_code(s.request(bad_arity).unwrap_err()),
        ErrorCode::Arity
    );
    let missing = Payload::InvokeMethod {
        obj_id: id,
        method: "nope".into(),
        args: vec![],
    };
    assert_eq!(
        remote_code(s.request(missing).unwrap_err()),
        ErrorCode::UnknownMethod
    );
    let ghost = Payload::ReadField {
        obj_id: 999_999,
        field: "v".into(),
    };
    assert_eq!(
        remote_code(s.request(ghost).unwrap_err()),
        ErrorCode::UnknownObject
    );
    let no_field = Payload::ReadField {
        obj_id: id,
        field: "w".into(),
    };
    assert_eq!(
        remote_code(s.request(no_field).unwrap_err()),
        ErrorCode::UnknownField
    );
    let no_class = Payload::ClassInfo {
        class: "Nope".into(),
    };
    assert_eq!(
        remote_code(s.request(no_class).unwrap_err()),
        ErrorCode::UnknownClass
    );
    assert_eq!(s.heap_digest().unwrap(), before);

    s.resume_all().unwrap();
    let (events, entry_count) = drain(&mut s);
    // pop is the only entry left; the invocations above produced none.
    assert_eq!(events.len(), 1);
    assert_eq!(entry_count, 4);
    assert_eq!(vm.join().unwrap().0, 0);
}

#[test]
fn pure_method_failure_is_a_target_exception() {
    let src = "class D { var n; def init() { n = 0; } pure def inv() { return 1 / n; } def go() { return 0; } }
               main { var d = new D(); d.go(); }";
    let (mut s, vm) = attach(src);
    s.set_event_policy(vec!["D".into()], true, false).unwrap();
    s.resume_all().unwrap();
    s.next_event_set().unwrap();
    s.resume_all().unwrap();
    let set = s.next_event_set().unwrap().unwrap();
    let Some(Event::MethodEntry(m)) = set.events.first() else {
        panic!()
    };
    let inv = Payload::InvokeMethod {
        obj_id: m.this_id.unwrap(),
        method: "inv".into(),
        args: vec![],
    };
    assert_eq!(
        remote_code(s.request(inv).unwrap_err()),
        ErrorCode::TargetException
    );
    s.resume_all().unwrap();
    drain(&mut s);
    assert_eq!(vm.join().unwrap().0, 0);
}

#[test]
fn requests_while_running_are_refused() {
    let src = "main { var i = 0; while (i < 300000) { i = i + 1; } print(i); }";
    let (mut s, vm) = attach(src);
    s.resume_all().unwrap();
    assert_eq!(
        remote_code(s.request(Payload::HeapDigest).unwrap_err()),
        ErrorCode::NotSuspended
    );
    // The session survives the refusal.
    let (events, entry_count) = drain(&mut s);
    assert!(events.is_empty());
    assert_eq!(entry_count, 0);
    assert_eq!(vm.join().unwrap().0, 0);
}

#[test]
fn suspend_halts_a_running_vm() {
    let src = "main { var i = 0; while (i < 2000000) { i = i + 1; } }";
    let (mut s, vm) = attach(src);
    s.resume_all().unwrap();
    s.suspend().unwrap();
    assert!(s.is_suspended());
    assert_eq!(s.heap_digest().unwrap().len(), 16);
    s.disconnect().unwrap();
    assert_eq!(vm.join().unwrap().0, 0);
}

#[test]
fn runtime_error_is_reported_in_death_event() {
    let src = fixture("bounded_stack.mob") + "main { var s = new BoundedStack(1); s.pop(); }";
    let (mut s, vm) = attach(&src);
    s.resume_all().unwrap();
    let set = s.next_event_set().unwrap().unwrap();
    match &set.events[..] {
        [Event::VmDeath {
            exit_status: 4,
            error: Some(e),
            ..
        }] => {
            assert!(e.contains("removeLast on empty sequence"), "{e}")
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(vm.join().unwrap().0, 4);
}

fn next_reply(stream: &mut TcpStream, id: u64) -> Payload {
    loop {
        match read_message(stream).unwrap().expect("connection open") {
            Decoded::Message(m) if m.id == Some(id) => return m.payload,
            Decoded::Message(_) => continue,
            Decoded::Malformed { reason, .. } => panic!("{reason}"),
        }
    }
}

#[test]
fn unknown_message_type_keeps_the_connection() {
    let (port, vm) = spawn_vm("main { print(1); }");
    let mut stream = TcpStream::connect(("127.0.0.1", port)).unwrap();
    connector_handshake(&mut stream).unwrap();
    let body = br#"{"type":"Teleport","id":1}"#;
    let mut frame = (body.len() as u32).to_be_bytes().to_vec();
    frame.extend_from_slice(body);
    std::io::Write::write_all(&mut stream, &frame).unwrap();
    match next_reply(&mut stream, 1) {
        Payload::Error {
            code: ErrorCode::UnknownType,
            ..
        } => {}
        other => panic!("{other:?}"),
    }
    write_message(&mut stream, &Message::new(Some(2), Payload::ListClasses)).unwrap();
    assert_eq!(
        next_reply(&mut stream, 2),
        Payload::ClassList { classes: vec![] }
    );
    write_message(&mut stream, &Message::new(Some(3), Payload::Resume)).unwrap();
    assert_eq!(next_reply(&mut stream, 3), Payload::Ok);
    let Decoded::Message(death) = read_message(&mut stream).unwrap().unwrap() else {
        panic!()
    };
    let Payload::EventSet(EventSet { events, .. }) = death.payload else {
        panic!()
    };
    assert!(matches!(
        events[..],
        [Event::VmDeath { exit_status: 0, .. }]
    ));
    drop(stream);
    assert_eq!(vm.join().unwrap().0, 0);
}
