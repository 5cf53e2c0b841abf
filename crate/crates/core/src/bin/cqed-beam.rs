fn main() {
    std::process::exit(cqed_beam::cli::run(std::env::args_os()));
}
