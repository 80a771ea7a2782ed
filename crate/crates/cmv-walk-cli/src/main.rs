use clap::Parser;

fn main() {
    let cli = cmv_walk_cli::Cli::parse();
    std::process::exit(cmv_walk_cli::execute(cli));
}
