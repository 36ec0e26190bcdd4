fn main() {
    std::process::exit(boutroux::cli::main_entry());
}
