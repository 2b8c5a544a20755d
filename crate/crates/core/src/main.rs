fn main() {
    std::process::exit(countdown::cli::main());
}
