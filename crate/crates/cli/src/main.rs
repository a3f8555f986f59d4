use clap::Parser;

fn main() {
    let cli = ebcert_cli::Cli::parse();
    if let Err(e) = ebcert_cli::run(cli) {
        eprintln!("ebcert: {e}");
        std::process::exit(e.exit_code());
    }
}
