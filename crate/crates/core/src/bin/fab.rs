fn main() {
    std::process::exit(forestalg::cli::main_with(std::env::args()));
}
