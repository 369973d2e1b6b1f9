fn main() {
    std::process::exit(causalbench_cli::dispatch(std::env::args_os()));
}
