fn main() {
    std::process::exit(treeot::cli::run(std::env::args_os()));
}
