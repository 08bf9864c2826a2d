fn main() {
    std::process::exit(vkde_cli::run(std::env::args_os()));
}
