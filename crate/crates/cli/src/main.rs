fn main() {
    std::process::exit(stochdim_cli::run(std::env::args_os()));
}
