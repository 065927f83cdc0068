fn main() {
    // Subcommand dispatcher lands with the calculus modules.
    eprintln!("arvo: not yet wired");
    std::process::exit(1);
}
