fn main() {
    std::process::exit(rmtedge::cli::main_with_args(std::env::args_os()));
}
