fn main() {
    std::process::exit(decgreen::cli::run());
}
