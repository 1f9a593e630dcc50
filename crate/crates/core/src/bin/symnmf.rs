fn main() {
    std::process::exit(symnmf::cli::main_with_args(std::env::args_os()));
}
