fn main() {
    std::process::exit(twistlab_cli::run(std::env::args_os()));
}
