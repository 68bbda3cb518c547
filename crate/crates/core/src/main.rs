fn main() {
    std::process::exit(nnts::cli::run(std::env::args_os()));
}
