fn main() {
    std::process::exit(fuzzypov::cli::main_with_args(std::env::args_os()));
}
