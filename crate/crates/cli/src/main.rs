fn main() {
    std::process::exit(spider_cli::run(std::env::args_os()));
}
