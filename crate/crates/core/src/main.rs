fn main() {
    std::process::exit(wgbih::cli::main_with_args(std::env::args_os().collect()));
}
