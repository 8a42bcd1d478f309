fn main() {
    std::process::exit(qtazrp::cli::run(std::env::args_os()));
}
