fn main() {
    std::process::exit(ergolab::run(std::env::args_os()));
}
