fn main() {
    std::process::exit(haystacks_cli::run(std::env::args_os()));
}
