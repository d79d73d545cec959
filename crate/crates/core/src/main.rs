fn main() {
    std::process::exit(pcs_sanity::cli::main_with_args(std::env::args_os()));
}
