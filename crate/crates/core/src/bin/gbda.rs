fn main() {
    std::process::exit(gbda::cli::run(std::env::args_os()));
}
