fn main() {
    std::process::exit(gripsense::cli::run(std::env::args_os()));
}
