fn main() {
    std::process::exit(tscv::cli::run(std::env::args_os()));
}
