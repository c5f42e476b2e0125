//! The `minivm` command line.

use std::path::PathBuf;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::agent::{DebugConfig, DebugMode};
use crate::{load_program, run_program, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "minivm", about = "Run MiniObj programs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run a program.
    Run {
        /// Wait for a debugger on this port (0 picks one).
        #[arg(long, value_name = "PORT", conflicts_with = "debug_connect")]
        debug_listen: Option<u16>,
        /// Dial a debugger listening at HOST:PORT.
        #[arg(long, value_name = "HOST:PORT")]
        debug_connect: Option<String>,
        /// Hold before the first statement of main until resumed.
        #[arg(long)]
        suspend: bool,
        file: PathBuf,
    },
}

pub fn version_line() -> String {
    format!(
        "{} (protocol {})",
        env!("CARGO_PKG_VERSION"),
        String::from_utf8_lossy(mdwp::MAGIC)
    )
}

/// Parses `args` (including the program name) and runs; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cmd = Cli::command().version(version_line());
    let cli = match cmd
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let Cmd::Run {
        debug_listen,
        debug_connect,
        suspend,
        file,
    } = cli.command;
    let mode = match (debug_listen, debug_connect) {
        (Some(port), _) => Some(DebugMode::Listen(port)),
        (None, Some(addr)) => match split_host_port(&addr) {
            Some((host, port)) => Some(DebugMode::Connect(host, port)),
            None => {
                eprintln!("minivm: --debug-connect expects HOST:PORT, got `{addr}`");
                return EXIT_USAGE;
            }
        },
        (None, None) => None,
    };
    if suspend && mode.is_none() {
        eprintln!("minivm: --suspend requires --debug-listen or --debug-connect");
        return EXIT_USAGE;
    }
    let src = match std::fs::read_to_string(&file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("minivm: {}: {e}", file.display());
            return EXIT_USAGE;
        }
    };
    let program = match load_program(&src) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("minivm: {}: {e}", file.display());
            return EXIT_USAGE;
        }
    };
    let debug = mode.map(|mode| DebugConfig {
        mode,
        suspend_on_start: suspend,
    });
    run_program(program, debug)
}

fn split_host_port(s: &str) -> Option<(String, u16)> {
    let (host, port) = s.rsplit_once(':')?;
    if host.is_empty() {
        return None;
    }
    Some((host.to_string(), port.parse().ok()?))
}
