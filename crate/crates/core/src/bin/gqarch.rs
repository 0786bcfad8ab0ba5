fn main() {
    std::process::exit(gqarch::cli::cli_main(std::env::args_os()));
}
