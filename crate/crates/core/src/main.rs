fn main() {
    std::process::exit(mverify::app::cli::run(std::env::args_os()));
}
