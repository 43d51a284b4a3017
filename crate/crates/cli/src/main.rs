fn main() {
    std::process::exit(qmarkov_cli::run(std::env::args_os()));
}
