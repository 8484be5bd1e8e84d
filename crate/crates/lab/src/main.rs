fn main() {
    std::process::exit(seqnoma::cli::main_from(std::env::args().collect()));
}
