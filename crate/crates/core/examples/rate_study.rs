//! Runs the `rate` experiment through the library runner and prints the fit.

use mfon::runner::{data_lines, run, Command, ExperimentConfig};

fn main() -> mfon::Result<()> {
    let dir = std::env::temp_dir().join("mfon-rate-study");
    let config = ExperimentConfig {
        n_values: vec![16, 32, 64, 128],
        oracle: true,
        output_dir: Some(dir.clone()),
        ..ExperimentConfig::for_command(Command::Rate)
    };
    let report = run(&config)?;
    println!("{}", report.summary);
    for line in data_lines(&dir.join("rate.csv"))? {
        println!("{line}");
    }
    Ok(())
}
