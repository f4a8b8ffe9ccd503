fn main() {
    std::process::exit(framedec::cli::main_with_args(std::env::args_os()));
}
