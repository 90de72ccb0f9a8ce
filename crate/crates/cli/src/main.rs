fn main() {
    std::process::exit(roadnet::run(std::env::args_os()));
}
