fn main() {
    let code = coburst::cli::run(std::env::args_os());
    std::process::exit(code);
}
