fn main() {
    std::process::exit(cantorcert_cli::run_args(std::env::args_os()));
}
