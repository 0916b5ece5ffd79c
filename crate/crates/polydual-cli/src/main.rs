fn main() {
    eprintln!("polydual: not yet wired up");
    std::process::exit(1);
}
