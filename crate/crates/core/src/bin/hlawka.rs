fn main() {
    std::process::exit(hlawka_core::cli::run(std::env::args().collect()));
}
