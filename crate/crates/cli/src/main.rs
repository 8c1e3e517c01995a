fn main() {
    std::process::exit(workday_cli::main_with(std::env::args_os()));
}
