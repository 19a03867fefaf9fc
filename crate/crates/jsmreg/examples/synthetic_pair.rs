//! Generate one synthetic test pair with a known ground-truth transform, a
//! single-image outlier patch, and an illumination change, then write the
//! images and the truth file the way the CLI's `synth` subcommand does.
//! Regenerating with the same seed is byte-identical, so pairs can be
//! referenced by `(seed, parameters)` instead of being checked in.
//!
//! Run with: `cargo run --example synthetic_pair`

use jsmreg::io;
use jsmreg::synth::{generate_case, IlluminationSpec, OutlierSpec, PatchTarget, SyntheticCase};
use jsmreg::RigidTransform;

fn main() -> anyhow::Result<()> {
    let spec = SyntheticCase {
        id: "demo".into(),
        width: 256,
        height: 256,
        seed: 42,
        truth: RigidTransform::new(7.0, -4.0, 5.0),
        noise_sigma: 0.01,
        outlier: Some(OutlierSpec {
            x: 60,
            y: 80,
            width: 96,
            height: 72,
            contrast: 1.0,
            target: PatchTarget::Floating,
            shift_x: 2.5,
            shift_y: -1.0,
            twist: 1.5,
        }),
        illumination: Some(IlluminationSpec {
            gain: 1.2,
            bias: 0.0,
        }),
    };

    let (reference, floating, truth) = generate_case(&spec)?;

    let out = std::path::Path::new("examples_out");
    std::fs::create_dir_all(out)?;
    io::write_pgm(out.join("pair_ref.pgm"), &reference)?;
    io::write_pgm(out.join("pair_flt.pgm"), &floating)?;
    std::fs::write(
        out.join("pair_truth.txt"),
        format!("{:.6} {:.6} {:.6}\n", truth.tx, truth.ty, truth.beta),
    )?;

    println!("truth: {truth}");
    println!(
        "patch: {}x{} px at ({}, {}) in the floating image, {:.1}% of the area",
        spec.outlier.as_ref().unwrap().width,
        spec.outlier.as_ref().unwrap().height,
        spec.outlier.as_ref().unwrap().x,
        spec.outlier.as_ref().unwrap().y,
        100.0 * spec.outlier.as_ref().unwrap().area_fraction(256, 256)
    );
    println!("wrote pair_ref.pgm, pair_flt.pgm, pair_truth.txt to examples_out/");
    Ok(())
}
