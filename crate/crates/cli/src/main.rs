use clap::Parser;
use rfh_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => println!("{summary}"),
        Err(e) => {
            eprintln!("rfh: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
