use std::time::Instant;

use clap::Parser;

fn main() {
    let start = Instant::now();
    let cli = ltlab::Cli::parse();
    let code = match ltlab::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    std::process::exit(code);
}
