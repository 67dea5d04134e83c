fn main() {
    std::process::exit(laguerre_p3::cli::run(std::env::args_os()));
}
