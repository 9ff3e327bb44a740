fn main() {
    std::process::exit(walkline_cli::run());
}
