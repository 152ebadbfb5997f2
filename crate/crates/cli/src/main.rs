use clap::Parser;

fn main() {
    let args = prfilt_cli::cli::Cli::parse();
    match prfilt_cli::cli::execute(args) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("{}", e.to_json());
            std::process::exit(e.exit_code());
        }
    }
}
