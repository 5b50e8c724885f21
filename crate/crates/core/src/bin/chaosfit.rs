fn main() {
    std::process::exit(chaosfit::cli::run(std::env::args_os()));
}
