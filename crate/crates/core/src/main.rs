fn main() {
    std::process::exit(ccm_ths::cli::main());
}
