fn main() {
    std::process::exit(rdsym::cli::run(std::env::args_os()));
}
