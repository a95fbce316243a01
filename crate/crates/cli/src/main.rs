fn main() {
    std::process::exit(pharmarec_cli::run(std::env::args_os()));
}
