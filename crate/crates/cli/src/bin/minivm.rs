fn main() {
    std::process::exit(minivm::cli::run(std::env::args_os()));
}
