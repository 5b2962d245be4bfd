fn main() {
    std::process::exit(udn_core::expcli::cli_main());
}
