fn main() {
    std::process::exit(adia_core::cli::main_with(std::env::args_os()));
}
