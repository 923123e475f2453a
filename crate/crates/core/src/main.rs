fn main() {
    std::process::exit(sagin::harness::cli_main(std::env::args_os()));
}
