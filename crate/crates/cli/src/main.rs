fn main() {
    std::process::exit(contour_bench_cli::run(std::env::args_os()));
}
