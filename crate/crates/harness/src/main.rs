fn main() {
    std::process::exit(setval_harness::cli::run(std::env::args_os()));
}
