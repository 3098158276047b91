use clap::Parser;

fn main() {
    std::process::exit(tovds::cli::main_with(tovds::cli::Cli::parse()));
}
