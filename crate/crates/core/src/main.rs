fn main() {
    std::process::exit(qdcorr::cli::main());
}
