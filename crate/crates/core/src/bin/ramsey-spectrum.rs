fn main() {
    std::process::exit(ramsey_spectrum::cli::run_from_args(std::env::args_os()));
}
