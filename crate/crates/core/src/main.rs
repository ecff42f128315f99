fn main() {
    std::process::exit(sns_core::cli::main_with_args(std::env::args().skip(1)));
}
