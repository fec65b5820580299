fn main() {
    std::process::exit(fockmaj::cli::dispatch(std::env::args_os()));
}
