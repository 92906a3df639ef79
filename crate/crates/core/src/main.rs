fn main() {
    std::process::exit(subell::cli::main_with(std::env::args_os()));
}
