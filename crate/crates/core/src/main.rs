fn main() {
    std::process::exit(extremal_qr::cli::main());
}
