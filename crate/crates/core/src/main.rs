fn main() {
    std::process::exit(stc::cli::main_with_args(std::env::args_os()));
}
