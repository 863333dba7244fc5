fn main() {
    std::process::exit(zonemem::cli::main_with(std::env::args_os()));
}
