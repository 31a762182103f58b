fn main() {
    std::process::exit(entroplane::cli::run(std::env::args_os()));
}
