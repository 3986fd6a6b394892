fn main() {
    std::process::exit(freevs::cli::run(std::env::args_os()));
}
