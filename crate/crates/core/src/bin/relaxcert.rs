fn main() {
    std::process::exit(relaxcert::cli::run(std::env::args_os()));
}
