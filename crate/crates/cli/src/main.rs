use clap::Parser;

fn main() {
    let cli = ymk_cli::Cli::parse();
    std::process::exit(ymk_cli::run(&cli));
}
