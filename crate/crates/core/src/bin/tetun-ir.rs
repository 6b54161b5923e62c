fn main() {
    std::process::exit(tetun_ir::cli::run(std::env::args_os()));
}
