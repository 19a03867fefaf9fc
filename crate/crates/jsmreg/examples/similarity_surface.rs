//! Map the similarity landscape around the true transform for both
//! measures on an outlier pair: evaluate each measure on a translation grid
//! at the true rotation, export the grids as CSV and as normalized heatmap
//! PGMs, and report where each surface peaks and how many strict local
//! maxima it carries. The weighted surface should peak at the truth with no
//! more maxima than the baseline.
//!
//! Run with: `cargo run --example similarity_surface`

use jsmreg::registration::MeasureSpec;
use jsmreg::synth::{generate_case, standard_outlier_suite};
use jsmreg::{similarity_surface, RegistrationConfig};

fn main() -> anyhow::Result<()> {
    let case = standard_outlier_suite().into_iter().next().expect("suite");
    let (reference, floating, truth) = generate_case(&case)?;
    println!("case {} (truth: {truth})", case.id);
    println!("grid: truth + (dx, dy), dx/dy in -10..=10 px, 1 px steps\n");

    let out = std::path::Path::new("examples_out");
    std::fs::create_dir_all(out)?;

    for measure in [MeasureSpec::Jmi, MeasureSpec::NmiBaseline] {
        let cfg = RegistrationConfig {
            measure,
            ..RegistrationConfig::default()
        };
        let grid = similarity_surface(&reference, &floating, &truth, &cfg, 10.0, 1.0)?;
        let (dx, dy, peak) = grid.argmax().expect("scorable grid");
        let label = measure.label().to_lowercase();
        std::fs::write(out.join(format!("surface_{label}.csv")), grid.to_csv_string())?;
        jsmreg::io::write_pgm(out.join(format!("surface_{label}.pgm")), &grid.heatmap())?;
        println!(
            "{:>4}: peak {:.4} at offset ({:+.1}, {:+.1}) px, {} strict local maxima",
            measure.label(),
            peak,
            dx,
            dy,
            grid.count_strict_local_maxima()
        );
    }
    println!("\nwrote surface_{{jmi,nmi}}.{{csv,pgm}} to examples_out/");
    Ok(())
}
