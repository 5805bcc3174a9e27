fn main() {
    std::process::exit(mner::cli::run(std::env::args_os()));
}
