fn main() {
    std::process::exit(pureflat::cli::run(std::env::args_os()));
}
