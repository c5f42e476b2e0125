//! Argument handling, connector selection and exit codes for `auditor`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use auditor_core::{
    build_constraint_table, exit_code, run_audit, AuditOptions, Kinds, ReportWriter,
};
use clap::{ArgGroup, CommandFactory, Parser};
use mdwp::{LaunchOutput, Session, SessionListener, MAGIC};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFRA: i32 = 1;

/// Env var naming the minivm executable used by `--launch`.
pub const VM_ENV: &str = "AUDITOR_VM";

/// How long a launched VM gets to exit after the audit before it is killed.
const VM_EXIT_GRACE: Duration = Duration::from_secs(5);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetMode {
    Launch(PathBuf),
    Attach { host: String, port: u16 },
    Listen(u16),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditConfig {
    pub constraints: PathBuf,
    pub target: TargetMode,
    /// Report file; stdout when absent.
    pub out: Option<PathBuf>,
    pub fail_fast: bool,
    pub kinds: Kinds,
    pub strict: bool,
    pub vm: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(
    name = "auditor",
    about = "Checks OCL contracts against a running MiniObj program",
    group(ArgGroup::new("target").required(true).args(["launch", "attach", "listen"]))
)]
struct Args {
    /// Constraint file
    #[arg(long, value_name = "FILE")]
    constraints: PathBuf,
    /// Start this program in a new VM and audit it
    #[arg(long, value_name = "PROGRAM")]
    launch: Option<PathBuf>,
    /// Audit a VM listening on HOST:PORT
    #[arg(long, value_name = "HOST:PORT")]
    attach: Option<String>,
    /// Wait for a VM to connect on PORT (0 picks one)
    #[arg(long, value_name = "PORT")]
    listen: Option<u16>,
    /// Write the report here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Stop after the first FAIL
    #[arg(long)]
    fail_fast: bool,
    /// Clause kinds to check, comma separated
    #[arg(long, value_name = "KINDS", default_value = "inv,pre,post")]
    check: String,
    /// Treat constraint registration warnings as errors
    #[arg(long)]
    strict: bool,
    /// minivm executable for --launch
    #[arg(long, value_name = "PATH")]
    vm: Option<PathBuf>,
}

/// What the command line asks for.
#[derive(Debug)]
pub enum Invocation {
    Audit(AuditConfig),
    /// `--help` or `--version`: print and exit 0.
    Info(String),
}

pub fn version_line() -> String {
    format!(
        "{} (protocol {})",
        env!("CARGO_PKG_VERSION"),
        String::from_utf8_lossy(MAGIC)
    )
}

/// Parses the command line. Usage errors come back as printable text.
pub fn parse_args<I, T>(argv: I) -> Result<Invocation, String>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cmd = Args::command().version(version_line());
    let matches = match cmd.try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Ok(Invocation::Info(e.to_string()))
                }
                _ => Err(e.render().to_string()),
            };
        }
    };
    let args =
        <Args as clap::FromArgMatches>::from_arg_matches(&matches).map_err(|e| e.to_string())?;
    let target = if let Some(p) = args.launch {
        TargetMode::Launch(p)
    } else if let Some(a) = args.attach {
        let (host, port) = split_host_port(&a)
            .ok_or_else(|| format!("error: --attach expects HOST:PORT, got '{a}'\n"))?;
        TargetMode::Attach { host, port }
    } else {
        TargetMode::Listen(args.listen.expect("clap enforces one target"))
    };
    let kinds = Kinds::parse(&args.check).map_err(|e| format!("error: --check: {e}\n"))?;
    Ok(Invocation::Audit(AuditConfig {
        constraints: args.constraints,
        target,
        out: args.out,
        fail_fast: args.fail_fast,
        kinds,
        strict: args.strict,
        vm: args.vm,
    }))
}

fn split_host_port(s: &str) -> Option<(String, u16)> {
    let (host, port) = s.rsplit_once(':')?;
    if host.is_empty() {
        return None;
    }
    Some((host.to_string(), port.parse().ok()?))
}

/// Entry point for the binary: parse, run, map to an exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_args(argv) {
        Ok(Invocation::Info(text)) => {
            print!("{text}");
            EXIT_OK
        }
        Ok(Invocation::Audit(cfg)) => run(&cfg),
        Err(usage) => {
            eprint!("{usage}");
            EXIT_INFRA
        }
    }
}

/// The minivm to launch: `--vm`, then `$AUDITOR_VM`, then a `minivm` next to
/// this executable, then whatever `minivm` is on the PATH.
pub fn resolve_vm(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(VM_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    let sibling = std::env::current_exe().ok().and_then(|exe| {
        exe.parent()
            .map(|d| d.join(format!("minivm{}", std::env::consts::EXE_SUFFIX)))
    });
    match sibling {
        Some(p) if p.is_file() => p,
        _ => PathBuf::from("minivm"),
    }
}

fn fail(msg: impl std::fmt::Display) -> i32 {
    eprintln!("auditor: {msg}");
    EXIT_INFRA
}

/// Runs one audit and returns the process exit code: 0 clean, 2 any FAIL,
/// 3 ERRORs only, 1 when the audit itself could not be carried out.
pub fn run(cfg: &AuditConfig) -> i32 {
    let text = match std::fs::read_to_string(&cfg.constraints) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {e}", cfg.constraints.display())),
    };
    let source_name = cfg.constraints.display().to_string();
    let file = match ocl::parse_constraint_file_named(&text, &source_name) {
        Ok(f) => f,
        Err(e) => return fail(format!("{source_name}: {e}")),
    };

    let (mut session, target_name) = match open(cfg) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let code = audit(cfg, &file, &mut session, &target_name);
    for w in session.take_warnings() {
        eprintln!("auditor: warning: {w}");
    }
    if let Some(status) = session.finish(VM_EXIT_GRACE) {
        if !status.success() {
            eprintln!("auditor: target VM exited with {status}");
        }
    }
    code
}

fn open(cfg: &AuditConfig) -> Result<(Session, String), mdwp::LinkError> {
    match &cfg.target {
        TargetMode::Launch(program) => {
            let vm = resolve_vm(cfg.vm.as_deref());
            // Keep stdout for the report when it goes there.
            let vm_stdout = match cfg.out {
                None => LaunchOutput::Stderr,
                Some(_) => LaunchOutput::Inherit,
            };
            let s = Session::launch(&vm, program, None, &vm_stdout)?;
            Ok((s, program.display().to_string()))
        }
        TargetMode::Attach { host, port } => {
            Ok((Session::attach(host, *port)?, format!("{host}:{port}")))
        }
        TargetMode::Listen(port) => {
            let listener = SessionListener::bind(*port)?;
            let port = listener.local_port();
            eprintln!("auditor: waiting for a VM on 127.0.0.1:{port}");
            Ok((listener.accept()?, format!("listen:{port}")))
        }
    }
}

fn audit(
    cfg: &AuditConfig,
    file: &ocl::ConstraintFile,
    session: &mut Session,
    target_name: &str,
) -> i32 {
    if !session.is_suspended() {
        eprintln!("auditor: warning: VM was not suspended at start; auditing from here on");
        if let Err(e) = session.suspend() {
            return fail(e);
        }
    }
    let (table, warnings) = match build_constraint_table(file, session) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    for w in &warnings {
        eprintln!("auditor: warning: {w}");
    }
    if cfg.strict && !warnings.is_empty() {
        let _ = session.disconnect();
        return fail(format!(
            "{} registration warning(s) with --strict",
            warnings.len()
        ));
    }

    let sink: Box<dyn Write> = match &cfg.out {
        Some(p) => match File::create(p) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => return fail(format!("{}: {e}", p.display())),
        },
        None => Box::new(io::stdout().lock()),
    };
    let mut report = ReportWriter::new(sink);
    if let Err(e) = report.header(&file.source_name, target_name) {
        return fail(format!("cannot write report: {e}"));
    }
    let options = AuditOptions {
        fail_fast: cfg.fail_fast,
        kinds: cfg.kinds,
        verify_purity: false,
    };
    match run_audit(session, table, report, options) {
        Ok((summary, _)) => {
            if summary.incomplete {
                eprintln!(
                    "auditor: session ended early: {}",
                    summary.vm_error.as_deref().unwrap_or("connection lost")
                );
            }
            exit_code(&summary)
        }
        Err(e) => fail(e),
    }
}
