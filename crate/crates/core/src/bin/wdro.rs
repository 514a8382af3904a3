fn main() {
    std::process::exit(wdro::cli::main_entry());
}
