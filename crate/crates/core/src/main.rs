fn main() {
    let code = magcone::cli::run(std::env::args_os());
    std::process::exit(code);
}
