fn main() {
    std::process::exit(qudit_phase_cli::run(std::env::args_os()));
}
