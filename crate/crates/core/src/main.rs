fn main() {
    std::process::exit(harity::cli::main_with(std::env::args_os()));
}
