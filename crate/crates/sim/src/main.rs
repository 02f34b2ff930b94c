fn main() {
    std::process::exit(dsee_anypath::cli::main_with_args(std::env::args_os()));
}
