fn main() {
    std::process::exit(cv2i::cli::main_with_args(std::env::args_os()));
}
