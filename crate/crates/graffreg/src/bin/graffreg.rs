fn main() {
    std::process::exit(graffreg::cli::run(std::env::args_os()));
}
