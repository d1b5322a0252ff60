fn main() {
    std::process::exit(evobeam::cli::main());
}
