fn main() {
    std::process::exit(restrict_lab::cli::main_with_args(std::env::args_os().collect()));
}
