fn main() {
    std::process::exit(orbitpose::cli::run(std::env::args_os()));
}
