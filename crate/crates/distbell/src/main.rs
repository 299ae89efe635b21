fn main() {
    std::process::exit(distbell::cli::cli_main(std::env::args_os()));
}
