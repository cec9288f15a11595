fn main() {
    std::process::exit(banachkit::cli::main());
}
