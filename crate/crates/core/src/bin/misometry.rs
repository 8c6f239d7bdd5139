fn main() {
    std::process::exit(misometry::cli::main_with(std::env::args_os()));
}
