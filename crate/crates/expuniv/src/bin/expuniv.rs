use clap::Parser;
use expuniv::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    std::process::exit(run(&cli, &mut stdout));
}
