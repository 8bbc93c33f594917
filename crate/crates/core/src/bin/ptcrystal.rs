fn main() {
    std::process::exit(ptcrystal::cli::run(std::env::args_os()));
}
