fn main() {
    std::process::exit(flowertrees::cli::run(std::env::args_os()));
}
