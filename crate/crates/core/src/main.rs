fn main() {
    std::process::exit(dqgnn::cli::run(std::env::args_os()));
}
