fn main() {
    std::process::exit(chp_morl::cli::main_with_args(std::env::args_os()));
}
