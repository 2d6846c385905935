fn main() {
    std::process::exit(bicheck::cli::main_with_args(std::env::args_os()));
}
