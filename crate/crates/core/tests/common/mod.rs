#![allow(dead_code)]

use std::io::{self, Write};
use std::net::{Ipv4Addr, TcpListener};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};

use auditor_core::{build_constraint_table, AuditOptions, AuditSummary, ReportWriter};
use mdwp::{Event, Session};
use minivm::{load_program, DebugConfig, DebugMode, Vm};

pub fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Line number (1-based) of the first line containing `needle`.
pub fn line_of(src: &str, needle: &str) -> u32 {
    src.lines()
        .position(|l| l.contains(needle))
        .expect("needle in source") as u32
        + 1
}

#[derive(Clone, Default)]
pub struct Capture(Arc<Mutex<Vec<u8>>>);

impl Write for Capture {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }
    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

impl Capture {
    pub fn text(&self) -> String {
        String::from_utf8(self.0.lock().unwrap().clone()).unwrap()
    }
}

pub struct VmRun {
    pub status: i32,
    pub stdout: String,
}

/// Starts `src` in a VM thread that waits suspended for a debugger, and
/// attaches to it. The VmStart set is left queued.
pub fn start(src: &str) -> (Session, JoinHandle<VmRun>) {
    let program = load_program(src).unwrap_or_else(|e| panic!("{e}"));
    let listener = TcpListener::bind((Ipv4Addr::LOCALHOST, 0)).unwrap();
    let port = listener.local_addr().unwrap().port();
    let vm = thread::spawn(move || {
        let agent = minivm::Agent::connect(DebugConfig {
            mode: DebugMode::Listener(listener),
            suspend_on_start: true,
        })
        .unwrap();
        let out = Capture::default();
        let mut vm = Vm::new(program);
        vm.set_output(Box::new(out.clone()));
        vm.attach(agent);
        let status = if vm.run_main().is_ok() { 0 } else { 4 };
        VmRun {
            status,
            stdout: out.text(),
        }
    });
    let session = Session::attach("127.0.0.1", port).unwrap();
    (session, vm)
}

/// Output of a plain run without any debugger.
pub fn run_plain(src: &str) -> VmRun {
    let program = load_program(src).unwrap();
    let out = Capture::default();
    let mut vm = Vm::new(program);
    vm.set_output(Box::new(out.clone()));
    let status = if vm.run_main().is_ok() { 0 } else { 4 };
    VmRun {
        status,
        stdout: out.text(),
    }
}

pub struct Audit {
    pub summary: AuditSummary,
    pub report: String,
    pub warnings: Vec<String>,
    pub vm: VmRun,
}

/// Audits `src` against the constraint text end to end.
pub fn audit(src: &str, constraints: &str, options: AuditOptions) -> Audit {
    let file = ocl::parse_constraint_file(constraints).unwrap_or_else(|e| panic!("{e}"));
    let (mut session, vm) = start(src);
    let (table, warnings) = build_constraint_table(&file, &mut session).unwrap();
    let mut report = ReportWriter::new(Vec::new());
    report.header("constraints.ocl", "program.mob").unwrap();
    let (summary, out) = auditor_core::run_audit(&mut session, table, report, options).unwrap();
    drop(session);
    Audit {
        summary,
        report: String::from_utf8(out).unwrap(),
        warnings,
        vm: vm.join().unwrap(),
    }
}

/// Resumes until the first entry into `method`, leaving the VM suspended
/// there. Returns the receiver id and the event's frame id.
pub fn stop_at_entry(session: &mut Session, class: &str, method: &str) -> (u64, u64) {
    session
        .set_event_policy(vec![class.into()], true, false)
        .unwrap();
    session.resume_all().unwrap();
    loop {
        let set = session.next_event_set().unwrap().expect("VM died first");
        for e in &set.events {
            if let Event::MethodEntry(m) = e {
                if m.method == method {
                    return (m.this_id.unwrap(), m.frame_id);
                }
            }
        }
        if session.is_suspended() {
            session.resume_all().unwrap();
        }
    }
}
