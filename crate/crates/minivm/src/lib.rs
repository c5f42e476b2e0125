//! MiniObj: a small single-threaded, class-based language with a
//! tree-walking interpreter and an embedded debug agent speaking MDWP.

pub mod agent;
pub mod ast;
pub mod cli;
pub mod error;
pub mod interp;
pub mod lexer;
pub mod parser;
pub mod purity;
pub mod value;

pub use agent::{handle_request, Agent, Control, DebugConfig, DebugMode, EventPolicy};
pub use ast::Program;
pub use error::{LoadError, PurityDiagnostic, RuntimeError};
pub use interp::{values_equal, Frame, Vm, MAX_DEPTH};
pub use parser::parse_program;
pub use purity::check_purity;
pub use value::{digest_hex, Heap, HeapEntry, Object, Value};

/// Parses and checks a program; purity violations refuse the load.
pub fn load_program(src: &str) -> Result<Program, LoadError> {
    let program = parse_program(src)?;
    let diags = check_purity(&program);
    if diags.is_empty() {
        Ok(program)
    } else {
        Err(LoadError::Purity(diags))
    }
}

/// Exit status of a program run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 4;

/// Runs `main`, optionally under a debugger, and returns the exit status.
pub fn run_program(program: Program, debug: Option<DebugConfig>) -> i32 {
    let mut vm = Vm::new(program);
    if let Some(cfg) = debug {
        match Agent::connect(cfg) {
            Ok(agent) => vm.attach(agent),
            Err(e) => {
                eprintln!("minivm: debugger connection failed: {e}");
                return EXIT_USAGE;
            }
        }
    }
    match vm.run_main() {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("minivm: runtime error at {e}");
            EXIT_RUNTIME
        }
    }
}
