fn main() {
    std::process::exit(service_economy_cli::cli_main(std::env::args_os()));
}
