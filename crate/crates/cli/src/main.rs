fn main() {
    std::process::exit(postsel_cli::run(std::env::args_os()));
}
