fn main() {
    std::process::exit(modecover_cli::run(std::env::args_os()));
}
