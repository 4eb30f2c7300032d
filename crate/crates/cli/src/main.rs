fn main() {
    std::process::exit(voxsep_cli::run(std::env::args_os()));
}
