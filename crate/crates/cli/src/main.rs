fn main() {
    std::process::exit(ksplit_cli::run_from_args(std::env::args_os().collect()));
}
