use clap::Parser;

fn main() {
    let cli = converse_cli::Cli::parse();
    std::process::exit(converse_cli::run(cli));
}
