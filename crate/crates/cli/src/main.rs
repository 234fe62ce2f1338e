use clap::Parser;

fn main() {
    let cli = hybcu_cli::Cli::parse();
    if let Err(e) = hybcu_cli::args::execute(cli) {
        eprintln!("hybcu: {e}");
        std::process::exit(e.exit_code());
    }
}
