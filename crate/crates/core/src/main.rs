fn main() {
    std::process::exit(pv_adoption::cli::cli_main(std::env::args_os()));
}
