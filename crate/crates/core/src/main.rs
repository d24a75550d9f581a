fn main() {
    std::process::exit(tunnelcld::cli::run(std::env::args().collect()));
}
