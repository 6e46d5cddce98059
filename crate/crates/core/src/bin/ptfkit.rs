fn main() {
    std::process::exit(ptfkit::cli::run(std::env::args_os()));
}
