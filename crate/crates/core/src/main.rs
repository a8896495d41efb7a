use clap::error::ErrorKind;
use clap::Parser;

use nubound::report::{run, Cli, RunConfig};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match RunConfig::from_cli(cli).and_then(|cfg| run(&cfg)) {
        Ok(outcome) => {
            if outcome.exit_code != 0 {
                eprintln!("bound violated; see the `violated` column");
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    std::process::exit(code);
}
