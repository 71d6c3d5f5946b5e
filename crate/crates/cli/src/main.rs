fn main() {
    std::process::exit(htsbayes_cli::dispatch(std::env::args_os()));
}
