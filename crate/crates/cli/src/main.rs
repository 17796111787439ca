use clap::error::ErrorKind;
use clap::Parser;

fn main() {
    let cli = match replab_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Exit status 2 is reserved for internal invariant violations.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            std::process::exit(code);
        }
    };
    match replab_cli::run(cli) {
        Ok(m) => {
            for (file, rows) in &m.outputs {
                eprintln!("wrote {file} ({rows} rows)");
            }
        }
        Err(e) => {
            eprintln!("replab: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
