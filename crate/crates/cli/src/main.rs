fn main() {
    std::process::exit(qconv::run(std::env::args().collect()));
}
