fn main() {
    std::process::exit(torusrep::cli::run(std::env::args_os()));
}
