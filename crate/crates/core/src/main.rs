fn main() {
    std::process::exit(hfcavity::cli::run(std::env::args_os()));
}
