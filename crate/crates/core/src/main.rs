fn main() {
    std::process::exit(morrey_bilinear::cli::main_with_args(std::env::args_os()));
}
