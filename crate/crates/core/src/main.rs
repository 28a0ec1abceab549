fn main() {
    std::process::exit(cmfmts::cli::main_exit());
}
