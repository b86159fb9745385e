fn main() {
    std::process::exit(tigranet::cli::run());
}
