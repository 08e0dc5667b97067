use clap::Parser;

fn main() {
    std::process::exit(rms_core::cli::run(rms_core::cli::Cli::parse()));
}
