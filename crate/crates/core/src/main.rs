fn main() {
    std::process::exit(csminer::cli::dispatch(std::env::args_os()));
}
