fn main() {
    std::process::exit(kstab::cli::run(std::env::args_os()));
}
