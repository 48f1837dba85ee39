fn main() {
    std::process::exit(harness::main_with(std::env::args_os().collect()));
}
