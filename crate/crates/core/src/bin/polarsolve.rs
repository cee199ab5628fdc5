fn main() {
    std::process::exit(polarsolve::cli::main_with_args(std::env::args_os()));
}
