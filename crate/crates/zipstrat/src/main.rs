fn main() {
    std::process::exit(zipstrat::cli::run());
}
