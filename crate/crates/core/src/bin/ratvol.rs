fn main() {
    std::process::exit(ratvol::cli::main_with_args(std::env::args_os()));
}
