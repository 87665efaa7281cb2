fn main() {
    std::process::exit(bfh::cli::run(std::env::args_os()));
}
