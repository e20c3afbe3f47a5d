fn main() {
    std::process::exit(lipsched::cli::run(std::env::args_os()));
}
