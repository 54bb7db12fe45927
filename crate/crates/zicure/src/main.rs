fn main() {
    std::process::exit(zicure::cli::run(std::env::args_os()));
}
