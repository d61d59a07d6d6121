fn main() {
    std::process::exit(saddlekit::cli::run(std::env::args_os()));
}
