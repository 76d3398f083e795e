fn main() {
    std::process::exit(skyroute_cli::run(std::env::args_os()));
}
