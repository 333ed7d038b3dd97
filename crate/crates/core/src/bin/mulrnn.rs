fn main() {
    std::process::exit(mulrnn::cli::run(std::env::args_os()));
}
