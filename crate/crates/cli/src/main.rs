fn main() {
    std::process::exit(rydpol_cli::dispatch(std::env::args_os()));
}
