fn main() {
    std::process::exit(pocs::cli::run(std::env::args_os()));
}
