fn main() {
    std::process::exit(gradiplate_cli::run(std::env::args_os()));
}
