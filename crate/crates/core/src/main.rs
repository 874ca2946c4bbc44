use clap::Parser;

fn main() {
    if let Err(e) = diss::cli::main_with(diss::cli::Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
