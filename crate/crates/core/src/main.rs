fn main() {
    std::process::exit(eofkit::lab::cli::run(std::env::args_os()));
}
