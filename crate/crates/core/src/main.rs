fn main() {
    std::process::exit(gafuzz::cli::main_with_args(std::env::args_os()));
}
