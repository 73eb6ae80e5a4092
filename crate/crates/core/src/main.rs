fn main() {
    std::process::exit(darbo::cli::run(std::env::args_os()));
}
