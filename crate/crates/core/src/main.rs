fn main() {
    std::process::exit(parasite_competition::cli::run(std::env::args_os()));
}
