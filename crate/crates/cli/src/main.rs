fn main() {
    std::process::exit(qfi_cli::main_with_args(std::env::args_os()));
}
