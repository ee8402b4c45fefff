fn main() {
    std::process::exit(tokentree::cli::run());
}
