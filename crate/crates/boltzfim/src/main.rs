fn main() {
    std::process::exit(boltzfim::cli::run());
}
