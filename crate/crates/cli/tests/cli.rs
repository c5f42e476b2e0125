mod support;

use std::io::{BufRead, BufReader};
use std::process::{Command, Stdio};

use auditor_core::{Outcome, HEADER_NOTE};
use support::*;

fn code(o: &std::process::Output) -> Option<i32> {
    o.status.code()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn clean_run_exits_zero_with_report_on_stdout() {
    let o = auditor(&["--constraints", "stack.ocl", "--launch", "stack_demo.mob"]);
    assert_eq!(code(&o), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = parse(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(report.header["note"], HEADER_NOTE);
    assert_eq!(report.header["target"], "stack_demo.mob");
    assert_eq!(report.summary.fail, 0);
    // Program output is moved out of the way of the report.
    assert!(String::from_utf8_lossy(&o.stderr).contains("30\n20\n10\n"));
}

#[test]
fn failures_exit_two() {
    let o = auditor(&["--constraints", "stack.ocl", "--launch", "broken_stack.mob"]);
    assert_eq!(code(&o), Some(2));
}

#[test]
fn errors_only_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_temp(
        &dir,
        "c.ocl",
        "context BoundedStack\n  inv: self.nope = 1\n",
    );
    let o = auditor(&["--constraints", &c, "--launch", "stack_demo.mob"]);
    assert_eq!(code(&o), Some(3));
    let report = parse(&String::from_utf8(o.stdout).unwrap());
    assert!(report.summary.error > 0);
    assert!(report.records.iter().all(|r| r.verdict == Outcome::Error));
}

#[test]
fn infrastructure_failures_exit_one() {
    let o = auditor(&["--constraints", "missing.ocl", "--launch", "stack_demo.mob"]);
    assert_eq!(code(&o), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.ocl"));

    let o = auditor(&[
        "--constraints",
        "stack.ocl",
        "--launch",
        "stack_demo.mob",
        "--vm",
        "/nonexistent/minivm",
    ]);
    assert_eq!(code(&o), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.ocl", "context BoundedStack\n  inv: self.v +\n");
    assert_eq!(
        code(&auditor(&[
            "--constraints",
            &bad,
            "--launch",
            "stack_demo.mob"
        ])),
        Some(1)
    );

    assert_eq!(code(&auditor(&["--constraints", "stack.ocl"])), Some(1));
}

#[test]
fn strict_refuses_registration_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_temp(&dir, "c.ocl", "context Nowhere\n  inv: true\n");
    let lenient = auditor(&["--constraints", &c, "--launch", "stack_demo.mob"]);
    assert_eq!(code(&lenient), Some(0));
    assert!(String::from_utf8_lossy(&lenient.stderr).contains("unknown context class Nowhere"));
    let strict = auditor(&[
        "--constraints",
        &c,
        "--launch",
        "stack_demo.mob",
        "--strict",
    ]);
    assert_eq!(code(&strict), Some(1));
}

#[test]
fn check_selects_clause_kinds() {
    let o = auditor(&[
        "--constraints",
        "stack.ocl",
        "--launch",
        "stack_demo.mob",
        "--check",
        "pre",
    ]);
    let report = parse(&String::from_utf8(o.stdout).unwrap());
    assert!(!report.records.is_empty());
    assert!(report.records.iter().all(|r| r.kind == "pre"));
}

#[test]
fn fail_fast_stops_early() {
    let o = auditor(&[
        "--constraints",
        "stack.ocl",
        "--launch",
        "broken_stack.mob",
        "--fail-fast",
    ]);
    assert_eq!(code(&o), Some(2));
    let report = parse(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(report.summary.fail, 1);
    assert!(report.summary.stopped_early);
}

#[test]
fn attach_to_a_waiting_vm() {
    let mut vm = Command::new(MINIVM)
        .args([
            "run",
            "--debug-listen",
            "0",
            "--suspend",
            "stack_overfill.mob",
        ])
        .current_dir(fixtures_dir())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(vm.stderr.take().unwrap()).lines();
    let port = loop {
        let line = lines.next().unwrap().unwrap();
        if let Some(p) = mdwp::session::announced_port(&line) {
            break p;
        }
    };
    std::thread::spawn(move || lines.for_each(drop));
    let o = auditor(&[
        "--constraints",
        "stack.ocl",
        "--attach",
        &format!("127.0.0.1:{port}"),
    ]);
    assert_eq!(code(&o), Some(2));
    let report = parse(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(report.fails().len(), 1);
    assert_eq!(vm.wait().unwrap().code(), Some(4));
}

#[test]
fn listen_for_a_dialing_vm() {
    let mut auditor = Command::new(AUDITOR)
        .args(["--constraints", "stack.ocl", "--listen", "0"])
        .current_dir(fixtures_dir())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(auditor.stderr.take().unwrap()).lines();
    let port = loop {
        let line = lines.next().unwrap().unwrap();
        if let Some(rest) = line.strip_prefix("auditor: waiting for a VM on 127.0.0.1:") {
            break rest.trim().to_string();
        }
    };
    std::thread::spawn(move || lines.for_each(drop));
    let vm = minivm(&[
        "run",
        "--debug-connect",
        &format!("127.0.0.1:{port}"),
        "--suspend",
        "stack_demo.mob",
    ]);
    assert_eq!(code(&vm), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&vm.stdout),
        "true\n20\n3\n30\n20\n10\n0\n"
    );
    let out = auditor.wait_with_output().unwrap();
    assert_eq!(code(&out), Some(0));
    let report = parse(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(report.summary.records, 89);
}

#[test]
fn version_names_the_protocol() {
    for bin in [AUDITOR, MINIVM] {
        let o = Command::new(bin).arg("--version").output().unwrap();
        assert_eq!(code(&o), Some(0));
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(
            text.contains("0.1.0") && text.contains("MDWP-001"),
            "{text}"
        );
    }
}
