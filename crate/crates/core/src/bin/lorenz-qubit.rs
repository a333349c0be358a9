fn main() {
    std::process::exit(lorenz_qubit_core::cli::main_with_args(std::env::args_os()));
}
