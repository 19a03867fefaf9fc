//! Visual verification of a registration: overlay the reference's edges
//! (red) with the resampled floating image's edges (green) before and after
//! registering — aligned edges add to yellow. Also prints the fraction of
//! reference edge pixels matched within 1 px, a blunt but honest score of
//! what the eye sees.
//!
//! Run with: `cargo run --example edge_overlay`

use jsmreg::edges::{edge_agreement, export_overlay};
use jsmreg::synth::{generate_case, standard_outlier_suite};
use jsmreg::{io, register, RegistrationConfig, RigidTransform};

fn main() -> anyhow::Result<()> {
    let case = standard_outlier_suite().into_iter().next().expect("suite");
    let (reference, floating, truth) = generate_case(&case)?;

    let cfg = RegistrationConfig::default();
    let result = register(&reference, &floating, &RigidTransform::identity(), &cfg)?;
    println!("truth     : {truth}");
    println!("recovered : {}", result.transform);

    let out = std::path::Path::new("examples_out");
    std::fs::create_dir_all(out)?;
    for (name, t) in [
        ("before", RigidTransform::identity()),
        ("after", result.transform),
    ] {
        let overlay = export_overlay(&reference, &floating, t);
        io::write_png_rgb(
            out.join(format!("overlay_{name}.png")),
            overlay.width,
            overlay.height,
            &overlay.data,
        )?;
        println!(
            "edge agreement {name:6}: {:.3}",
            edge_agreement(&reference, &floating, t)
        );
    }
    println!("wrote overlay_before.png and overlay_after.png to examples_out/");
    Ok(())
}
