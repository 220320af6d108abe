use clap::Parser;

fn main() {
    let cli = parabola_cli::Cli::parse();
    std::process::exit(parabola_cli::execute(&cli));
}
