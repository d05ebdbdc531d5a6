fn main() {
    std::process::exit(stochgame::cli::run_cli(std::env::args_os()));
}
