fn main() {
    std::process::exit(rwcake::cli::main_with_args(std::env::args_os()));
}
