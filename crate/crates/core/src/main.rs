fn main() {
    std::process::exit(lorentzdist::cli::run(std::env::args_os()));
}
