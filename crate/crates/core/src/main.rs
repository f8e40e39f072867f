fn main() {
    std::process::exit(renewal_ks::harness::cli_main(std::env::args_os()));
}
