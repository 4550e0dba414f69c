fn main() {
    std::process::exit(hullab_cli::run(std::env::args_os()));
}
