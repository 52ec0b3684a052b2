fn main() {
    std::process::exit(logbound::cli::run(std::env::args_os()));
}
