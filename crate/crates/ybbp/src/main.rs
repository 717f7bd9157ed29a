use clap::Parser;
use ybbp::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = ybbp::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
