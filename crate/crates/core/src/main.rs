fn main() {
    std::process::exit(merkle_collision::cli::dispatch(std::env::args_os()));
}
