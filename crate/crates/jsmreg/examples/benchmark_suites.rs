//! Run a slice of the built-in clean and outlier suites through both
//! measures, print the comparison table, and write the deterministic CSV
//! (seeds and config fixed, timing columns excluded, so the bytes are
//! stable across runs and machines). The full suites are what the
//! acceptance tests run; three cases each keep this example quick.
//!
//! Run with: `cargo run --example benchmark_suites`

use jsmreg::bench::{format_table, records_to_csv, run_benchmark};
use jsmreg::registration::MeasureSpec;
use jsmreg::synth::{standard_clean_suite, standard_outlier_suite};
use jsmreg::RegistrationConfig;

fn main() -> anyhow::Result<()> {
    let suite: Vec<_> = standard_clean_suite()
        .into_iter()
        .take(3)
        .chain(standard_outlier_suite().into_iter().take(3))
        .collect();
    let measures = [MeasureSpec::Jmi, MeasureSpec::NmiBaseline];
    let records = run_benchmark(&suite, &measures, &RegistrationConfig::default())?;

    print!("{}", format_table(&records));

    let out = std::path::Path::new("examples_out");
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("benchmark.csv"), records_to_csv(&records))?;
    println!("\nwrote benchmark.csv to examples_out/");
    Ok(())
}
