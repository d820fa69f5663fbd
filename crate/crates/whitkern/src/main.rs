fn main() {
    std::process::exit(whitkern::run(std::env::args_os()));
}
