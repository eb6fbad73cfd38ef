fn main() {
    std::process::exit(qselftest::cli::run(std::env::args_os()));
}
