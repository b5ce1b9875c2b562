fn main() {
    std::process::exit(chiral_cli::run_from(std::env::args_os()));
}
