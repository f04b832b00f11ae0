fn main() {
    std::process::exit(fta_cli::run_process());
}
