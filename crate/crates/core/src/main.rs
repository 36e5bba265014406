fn main() {
    std::process::exit(apa::cli::run(std::env::args_os()));
}
