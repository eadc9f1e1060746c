fn main() {
    std::process::exit(qsynth::cli::run(std::env::args_os()));
}
