fn main() { std::process::exit(automaticity::cli::main()) }
