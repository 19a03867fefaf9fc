//! Register a synthetic image against itself from a deliberately wrong
//! start. The recovered transform should return to identity to well under a
//! tenth of a pixel; this is the cheapest end-to-end sanity check of the
//! whole pipeline (pyramid, saliency, JSM, histogram, simplex).
//!
//! Run with: `cargo run --example self_registration`

use jsmreg::synth::{generate_case, SyntheticCase};
use jsmreg::{register, RegistrationConfig, RigidTransform};

fn main() -> anyhow::Result<()> {
    let spec = SyntheticCase {
        id: "self".into(),
        width: 256,
        height: 256,
        seed: 17,
        truth: RigidTransform::identity(),
        noise_sigma: 0.0,
        outlier: None,
        illumination: None,
    };
    let (image, _, _) = generate_case(&spec)?;

    let start = RigidTransform::new(6.0, -4.5, 3.0);
    let cfg = RegistrationConfig::default();
    let result = register(&image, &image, &start, &cfg)?;

    println!("start     : {}", start);
    println!("recovered : {}", result.transform);
    println!(
        "residual  : |tx| {:.4} px, |ty| {:.4} px, |beta| {:.4} deg",
        result.transform.tx.abs(),
        result.transform.ty.abs(),
        result.transform.beta.abs()
    );
    println!(
        "cost evaluations: {} across {} pyramid levels ({:.2} s)",
        result.total_evaluations,
        result.levels.len(),
        result.seconds
    );
    Ok(())
}
