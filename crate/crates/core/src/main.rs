fn main() {
    std::process::exit(onoff_delay::cli::run_from_args(std::env::args_os()));
}
