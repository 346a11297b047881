fn main() {
    std::process::exit(lora_phy_lab::cli::run());
}
