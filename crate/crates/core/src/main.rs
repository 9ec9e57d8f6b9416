fn main() {
    std::process::exit(ust3d::cli::dispatch(std::env::args_os()));
}
