fn main() { std::process::exit(maskcert::cli::run()) }
