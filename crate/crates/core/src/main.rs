fn main() {
    std::process::exit(zygflow::cli::run(std::env::args_os()));
}
