fn main() {
    std::process::exit(skewspec::cli::run(std::env::args_os()));
}
