fn main() {
    std::process::exit(tetris_count::cli::main());
}
