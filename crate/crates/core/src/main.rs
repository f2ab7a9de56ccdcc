use std::io::Write;

fn main() {
    let outcome = onebit::cli::run_from_args(std::env::args());
    if !outcome.report.is_empty() {
        print!("{}", outcome.report);
    }
    if let Some(err) = &outcome.error {
        let _ = writeln!(std::io::stderr(), "{err}");
    }
    std::process::exit(outcome.exit_code);
}
