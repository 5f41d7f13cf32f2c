fn main() {
    std::process::exit(sparsegen_harness::cli::main_with_args(std::env::args_os()));
}
