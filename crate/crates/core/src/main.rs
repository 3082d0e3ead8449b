fn main() {
    std::process::exit(trispin::cli::run(std::env::args_os()));
}
