fn main() {
    std::process::exit(pdcorr::cli::run(std::env::args_os()));
}
