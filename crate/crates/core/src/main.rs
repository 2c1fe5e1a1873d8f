use clap::Parser;

fn main() {
    let cli = nbcar::cli::Cli::parse();
    std::process::exit(nbcar::cli::run(cli));
}
