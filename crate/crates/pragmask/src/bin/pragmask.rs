fn main() {
    std::process::exit(pragmask::cli_io::run());
}
