//! The case this crate exists for: one image contains a structure the other
//! does not — here a dim window of scene content displaced from where the
//! truth puts it — and the unweighted histogram happily counts the false
//! correspondence as evidence. Register the same pair with the weighted and
//! the baseline measure and compare both against the known truth.
//!
//! Run with: `cargo run --example outlier_robustness`

use jsmreg::registration::MeasureSpec;
use jsmreg::synth::{generate_case, standard_outlier_suite};
use jsmreg::{register, RegistrationConfig, RigidTransform};

fn main() -> anyhow::Result<()> {
    let case = standard_outlier_suite().into_iter().next().expect("suite");
    let (reference, floating, truth) = generate_case(&case)?;
    println!("case {} (truth: {truth})", case.id);

    for measure in [MeasureSpec::Jmi, MeasureSpec::NmiBaseline] {
        let cfg = RegistrationConfig {
            measure,
            ..RegistrationConfig::default()
        };
        let r = register(&reference, &floating, &RigidTransform::identity(), &cfg)?;
        let e = [
            (r.transform.tx - truth.tx).abs(),
            (r.transform.ty - truth.ty).abs(),
            (r.transform.beta - truth.beta).abs(),
        ];
        println!(
            "{:>4}: {}  |  error {:.4} px, {:.4} px, {:.4} deg  ({} evals, {:.2} s)",
            measure.label(),
            r.transform,
            e[0],
            e[1],
            e[2],
            r.total_evaluations,
            r.seconds
        );
    }
    Ok(())
}
