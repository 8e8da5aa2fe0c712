fn main() {
    std::process::exit(monotone_lrt::cli::main_with(std::env::args_os()));
}
