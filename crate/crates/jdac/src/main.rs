fn main() {
    jdac::cli::main_entry()
}
