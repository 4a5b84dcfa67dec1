fn main() {
    std::process::exit(chiral_cavity::cli::main_entry(std::env::args_os()));
}
