fn main() {
    std::process::exit(dpla::cli::main_with_args(std::env::args_os()));
}
