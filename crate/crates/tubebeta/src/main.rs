fn main() {
    std::process::exit(tubebeta::cli::run());
}
