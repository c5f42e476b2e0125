fn main() {
    std::process::exit(auditor_cli::main_with_args(std::env::args_os()));
}
