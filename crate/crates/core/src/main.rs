fn main() {
    std::process::exit(radchaos::cli::run(std::env::args_os()));
}
