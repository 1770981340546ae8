fn main() {
    std::process::exit(sufctl::main_with_args(std::env::args_os()));
}
