fn main() {
    std::process::exit(symsurf::lab::cli::main());
}
