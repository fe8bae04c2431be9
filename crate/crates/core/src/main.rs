fn main() {
    std::process::exit(kidcheck::cli::main_with_args(std::env::args_os()));
}
