fn main() {
    std::process::exit(fibrocube::cli::main());
}
