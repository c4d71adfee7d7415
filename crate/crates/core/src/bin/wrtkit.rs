fn main() {
    std::process::exit(wrtkit::cli::run(std::env::args_os()));
}
