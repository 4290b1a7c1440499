use clap::Parser;

fn main() {
    let cli = corrgan::cli::Cli::parse();
    if let Err(e) = corrgan::cli::dispatch(cli) {
        eprintln!("corrgan: {e}");
        std::process::exit(1);
    }
}
