fn main() {
    std::process::exit(topicirt::cli::run(std::env::args_os()));
}
