use clap::Parser;

fn main() {
    let cli = anthrokit::Cli::parse();
    if let Err(err) = anthrokit::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(anthrokit::exit_code(&err));
    }
}
