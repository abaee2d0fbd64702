fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(hesslab::cli::run(&argv));
}
