fn main() {
    std::process::exit(finsolv::cli::run());
}
