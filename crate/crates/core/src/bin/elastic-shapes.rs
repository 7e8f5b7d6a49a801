fn main() {
    std::process::exit(elastic_shapes::cli::main());
}
