fn main() {
    std::process::exit(gameconn::cli::run(std::env::args_os()));
}
