fn main() {
    std::process::exit(whkit::cli::run(std::env::args_os()));
}
