fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(mzo::cli::main_with_args(args));
}
