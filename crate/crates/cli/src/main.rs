use clap::Parser;

fn main() {
    std::process::exit(szego_cli::main_with(szego_cli::Cli::parse()));
}
