fn main() {
    std::process::exit(meanfield_cli::main_with(std::env::args()));
}
