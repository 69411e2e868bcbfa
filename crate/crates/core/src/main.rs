fn main() {
    std::process::exit(hexsep::cli::main_with_args(std::env::args_os()));
}
