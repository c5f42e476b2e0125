#![allow(dead_code)]

use std::io::{self, Write};
use std::net::{Ipv4Addr, TcpListener};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};

use auditor_core::{
    build_constraint_table, parse_report, AuditOptions, AuditRecord, AuditSummary, ReportLine,
    ReportWriter,
};
use mdwp::{Event, Session};
use minivm::{load_program, DebugConfig, DebugMode, Vm};

pub const AUDITOR: &str = env!("CARGO_BIN_EXE_auditor");
pub const MINIVM: &str = env!("CARGO_BIN_EXE_minivm");

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> String {
    let path = fixtures_dir().join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Line number (1-based) of the first line containing `needle`.
pub fn line_of(src: &str, needle: &str) -> u32 {
    src.lines()
        .position(|l| l.contains(needle))
        .expect("needle in source") as u32
        + 1
}

/// Runs the auditor binary from the fixtures directory with the bundled VM.
pub fn auditor(args: &[&str]) -> Output {
    auditor_in(&fixtures_dir(), args)
}

pub fn auditor_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(AUDITOR)
        .args(args)
        .current_dir(dir)
        .env("AUDITOR_VM", MINIVM)
        .output()
        .expect("run auditor")
}

pub fn minivm(args: &[&str]) -> Output {
    Command::new(MINIVM)
        .args(args)
        .current_dir(fixtures_dir())
        .output()
        .expect("run minivm")
}

pub struct Report {
    pub header: serde_json::Value,
    pub records: Vec<AuditRecord>,
    pub summary: AuditSummary,
}

pub fn parse(text: &str) -> Report {
    let mut header = serde_json::Value::Null;
    let mut records = Vec::new();
    let mut summary = None;
    for line in parse_report(text).unwrap_or_else(|e| panic!("bad report: {e}\n{text}")) {
        match line {
            ReportLine::Header(h) => header = h,
            ReportLine::Record(r) => records.push(r),
            ReportLine::Summary(s) => summary = Some(s),
        }
    }
    Report {
        header,
        records,
        summary: summary.expect("report has a summary line"),
    }
}

impl Report {
    pub fn fails(&self) -> Vec<&AuditRecord> {
        self.records
            .iter()
            .filter(|r| !r.member && r.verdict == auditor_core::Outcome::Fail)
            .collect()
    }
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

/// Runs `src` to completion without a debugger; the VM is returned so its
/// final heap can be inspected.
pub fn run_plain(src: &str) -> (VmRun, Vm) {
    let program = load_program(src).unwrap_or_else(|e| panic!("{e}"));
    let out = Capture::default();
    let mut vm = Vm::new(program);
    vm.set_output(Box::new(out.clone()));
    let status = if vm.run_main().is_ok() { 0 } else { 4 };
    (
        VmRun {
            status,
            stdout: out.text(),
        },
        vm,
    )
}

pub struct Audit {
    pub report: Report,
    pub warnings: Vec<String>,
    pub vm: VmRun,
}

/// Audits `src` in-process against the constraint text end to end.
pub fn audit(src: &str, constraints: &str, options: AuditOptions) -> Audit {
    let file =
        ocl::parse_constraint_file(constraints).unwrap_or_else(|e| panic!("{e}\n{constraints}"));
    let (mut session, vm) = start(src);
    let (table, warnings) = build_constraint_table(&file, &mut session).unwrap();
    let mut report = ReportWriter::new(Vec::new());
    report.header("constraints.ocl", "program.mob").unwrap();
    let (_, out) = auditor_core::run_audit(&mut session, table, report, options).unwrap();
    drop(session);
    Audit {
        report: parse(&String::from_utf8(out).unwrap()),
        warnings,
        vm: vm.join().unwrap(),
    }
}

/// Resumes until the first entry into `class::method`, leaving the VM
/// suspended there. Returns the receiver id.
pub fn stop_at_entry(session: &mut Session, class: &str, method: &str) -> u64 {
    session
        .set_event_policy(vec![class.into()], true, false)
        .unwrap();
    session.resume_all().unwrap();
    loop {
        let set = session.next_event_set().unwrap().expect("VM died first");
        for e in &set.events {
            if let Event::MethodEntry(m) = e {
                if m.method == method {
                    return m.this_id.unwrap();
                }
            }
        }
        if session.is_suspended() {
            session.resume_all().unwrap();
        }
    }
}

/// Drains the session to VM death, resuming as needed; returns every event.
pub fn drain(session: &mut Session) -> Vec<Event> {
    let mut events = Vec::new();
    while let Some(set) = session.next_event_set().unwrap() {
        events.extend(set.events);
        if session.is_suspended() {
            session.resume_all().unwrap();
        }
    }
    events
}
