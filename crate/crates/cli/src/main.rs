fn main() {
    std::process::exit(assignforest_cli::run(std::env::args_os()));
}
