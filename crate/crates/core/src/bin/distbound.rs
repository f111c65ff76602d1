fn main() {
    std::process::exit(distbound::cli::run(std::env::args_os()));
}
