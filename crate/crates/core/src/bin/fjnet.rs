fn main() {
    std::process::exit(forkjoin::cli::run_cli(std::env::args_os()));
}
