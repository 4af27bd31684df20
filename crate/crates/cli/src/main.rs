fn main() {
    std::process::exit(marsim_cli::main_with_args(std::env::args_os()));
}
