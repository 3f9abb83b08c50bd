fn main() {
    let code = vfp_stab::cli::main_from_args(std::env::args().skip(1));
    std::process::exit(code);
}
