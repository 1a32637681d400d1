fn main() {
    std::process::exit(hetnet_duda::cli::main_with_args(std::env::args_os()));
}
