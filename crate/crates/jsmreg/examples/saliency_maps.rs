//! Export the intermediate maps the weighted measure is built from: each
//! image's multiscale saliency, and the joint saliency map (JSM) evaluated
//! at the true transform and at identity. At the truth, aligned structure
//! lights up and the single-image outlier patch stays dark — that darkness
//! is exactly the weight the patch loses in the joint histogram.
//!
//! Run with: `cargo run --example saliency_maps`

use jsmreg::img::default_pyramid_levels;
use jsmreg::jsm::compute_jsm;
use jsmreg::saliency::build_rsv_field;
use jsmreg::synth::{generate_case, standard_outlier_suite};
use jsmreg::{io, CosinePolicy, RigidTransform};

fn main() -> anyhow::Result<()> {
    let case = standard_outlier_suite().into_iter().next().expect("suite");
    let (reference, floating, truth) = generate_case(&case)?;

    let levels = default_pyramid_levels(reference.width(), reference.height());
    let (ref_sal, ref_rsv) = build_rsv_field(&reference, levels, 0.10);
    let (flt_sal, flt_rsv) = build_rsv_field(&floating, levels, 0.10);

    let out = std::path::Path::new("examples_out");
    std::fs::create_dir_all(out)?;
    io::write_normalized_pgm(
        out.join("saliency_ref.pgm"),
        ref_sal.data(),
        ref_sal.width(),
        ref_sal.height(),
    )?;
    io::write_normalized_pgm(
        out.join("saliency_flt.pgm"),
        flt_sal.data(),
        flt_sal.width(),
        flt_sal.height(),
    )?;

    for (name, t) in [("truth", truth), ("identity", RigidTransform::identity())] {
        let map = compute_jsm(&ref_rsv, &flt_rsv, &t, CosinePolicy::Abs);
        io::write_normalized_pgm(
            out.join(format!("jsm_{name}.pgm")),
            map.weights(),
            map.width(),
            map.height(),
        )?;
        println!(
            "JSM at {name:8}: {:7.1} total weight over {} overlap pixels (mean {:.3})",
            map.sum_weights(),
            map.overlap_count(),
            map.sum_weights() / map.overlap_count().max(1) as f64
        );
    }

    println!(
        "RSV coverage: {} / {} reference pixels carry an orientation",
        ref_rsv.valid_count(),
        reference.width() * reference.height()
    );
    println!("wrote saliency_{{ref,flt}}.pgm and jsm_{{truth,identity}}.pgm to examples_out/");
    Ok(())
}
