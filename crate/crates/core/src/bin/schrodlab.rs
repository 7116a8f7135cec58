fn main() {
    std::process::exit(schrodlab::cli::main(std::env::args_os()));
}
