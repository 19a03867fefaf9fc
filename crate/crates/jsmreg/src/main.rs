//! Command-line front end: every library capability as a subcommand.
//!
//! The binary stays thin — argument parsing, file naming, and printing live
//! here; everything else is the library. Exit code is nonzero iff any
//! requested operation failed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use jsmreg::config::{
    cosine_policy_from_str, interpolation_from_str, measure_from_str, resolve, PartialConfig,
};
use jsmreg::registration::{register, similarity_surface, MeasureSpec, RegistrationConfig};
use jsmreg::synth::{
    generate_case, IlluminationSpec, OutlierSpec, PatchTarget, SyntheticCase,
};
use jsmreg::transform::RigidTransform;
use jsmreg::{bench, edges, io, jsm, saliency};

#[derive(Parser)]
#[command(
    name = "jsmreg",
    version,
    about = "Rigid 2D registration weighted by joint structure saliency"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Register a floating image to a reference image.
    Register(RegisterArgs),
    /// Sample the similarity surface on a translation grid.
    Surface(SurfaceArgs),
    /// Generate a synthetic pair with known ground truth.
    Synth(SynthArgs),
    /// Run a benchmark suite file; write a CSV and a summary table.
    Bench(BenchArgs),
    /// Export an image's saliency map and structure-direction table.
    Saliency(SaliencyArgs),
    /// Export the joint saliency map of a pair at a given transform.
    Jsm(JsmArgs),
}

/// Registration settings: a TOML file overridden by individual flags.
#[derive(Args)]
struct ConfigFlags {
    /// Settings file (TOML); explicit flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Similarity measure: jmi | nmi-baseline.
    #[arg(long)]
    measure: Option<String>,
    /// Histogram interpolation: nearest | bilinear | pv.
    #[arg(long)]
    interpolation: Option<String>,
    /// Histogram bins per axis.
    #[arg(long)]
    bins: Option<usize>,
    /// Pyramid levels (default: derived from image size).
    #[arg(long)]
    pyramid_levels: Option<usize>,
    /// Evaluations between full JSM recomputations.
    #[arg(long)]
    jsm_cadence: Option<usize>,
    /// Saliency threshold as a fraction of the map maximum.
    #[arg(long)]
    saliency_threshold: Option<f64>,
    /// RSV cosine folding: abs | clamp.
    #[arg(long)]
    cosine_policy: Option<String>,
    /// Cost-evaluation budget per pyramid level.
    #[arg(long)]
    max_evals: Option<usize>,
    /// Simplex termination tolerance in scaled steps.
    #[arg(long)]
    min_step: Option<f64>,
}

impl ConfigFlags {
    fn resolve(&self) -> anyhow::Result<RegistrationConfig> {
        let file = match &self.config {
            Some(path) => Some(PartialConfig::load(path)?),
            None => None,
        };
        let flags = PartialConfig {
            measure: self.measure.as_deref().map(measure_from_str).transpose()?,
            interpolation: self
                .interpolation
                .as_deref()
                .map(interpolation_from_str)
                .transpose()?,
            bins: self.bins,
            pyramid_levels: self.pyramid_levels,
            jsm_cadence: self.jsm_cadence,
            saliency_threshold: self.saliency_threshold,
            cosine_policy: self
                .cosine_policy
                .as_deref()
                .map(cosine_policy_from_str)
                .transpose()?,
            max_evals: self.max_evals,
            min_step: self.min_step,
            initial_step: None,
        };
        let mut layers: Vec<&PartialConfig> = Vec::new();
        if let Some(f) = &file {
            layers.push(f);
        }
        layers.push(&flags);
        Ok(resolve(&layers)?)
    }
}

#[derive(Args)]
struct StartFlags {
    /// Transform x translation in pixels.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tx: f64,
    /// Transform y translation in pixels.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    ty: f64,
    /// Transform rotation in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
}

impl StartFlags {
    fn transform(&self) -> RigidTransform {
        RigidTransform::new(self.tx, self.ty, self.beta)
    }
}

#[derive(Args)]
struct RegisterArgs {
    reference: PathBuf,
    floating: PathBuf,
    #[command(flatten)]
    start: StartFlags,
    #[command(flatten)]
    cfg: ConfigFlags,
    /// Write the full result (per-level traces) as JSON here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write a red/green edge overlay at the result transform here (PNG).
    #[arg(long)]
    overlay: Option<PathBuf>,
}

#[derive(Args)]
struct SurfaceArgs {
    reference: PathBuf,
    floating: PathBuf,
    /// Grid center transform.
    #[command(flatten)]
    center: StartFlags,
    #[command(flatten)]
    cfg: ConfigFlags,
    /// Translation half-range in pixels.
    #[arg(long, default_value_t = 10.0)]
    range: f64,
    /// Grid step in pixels.
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    /// Output prefix: writes <prefix>.csv, <prefix>.pgm, <prefix>_mask.pgm.
    #[arg(long, default_value = "surface")]
    out_prefix: String,
}

#[derive(Args)]
struct SynthArgs {
    /// RNG seed; the pair is a pure function of the flags.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    width: usize,
    #[arg(long, default_value_t = 256)]
    height: usize,
    /// Ground-truth transform.
    #[command(flatten)]
    truth: StartFlags,
    /// Additive Gaussian noise sigma (intensity units).
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    /// Outlier patch "x,y,width,height" (absent: no patch).
    #[arg(long)]
    patch: Option<String>,
    /// Patch contrast in [0, 1]: visibility of the displaced content
    /// inside the recess (0 leaves a flat window).
    #[arg(long, default_value_t = 1.0)]
    patch_contrast: f64,
    /// Which image receives the patch: reference | floating.
    #[arg(long, default_value = "floating")]
    patch_in: String,
    /// Displacement "dx,dy" of the content shown inside the patch.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    patch_shift: String,
    /// Rotation of the shown content about the patch center, in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    patch_twist: f64,
    /// Illumination gain on the floating image.
    #[arg(long)]
    gain: Option<f64>,
    /// Illumination bias on the floating image.
    #[arg(long, allow_negative_numbers = true)]
    bias: Option<f64>,
    /// Output prefix: writes <prefix>_ref.pgm, <prefix>_flt.pgm,
    /// <prefix>_truth.txt.
    #[arg(long, default_value = "case")]
    out_prefix: String,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite description: a TOML file with [[case]] tables.
    suite: PathBuf,
    /// Comma-separated measures to run (jmi, nmi-baseline).
    #[arg(long, default_value = "jmi,nmi-baseline")]
    measures: String,
    #[command(flatten)]
    cfg: ConfigFlags,
    /// CSV output path.
    #[arg(long, default_value = "bench.csv")]
    csv: PathBuf,
    /// Optional path for the text table (always printed to stdout).
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct SaliencyArgs {
    image: PathBuf,
    /// Pyramid levels for the multiscale map (default: derived from size).
    #[arg(long)]
    levels: Option<usize>,
    /// Threshold as a fraction of the map maximum.
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
    /// Normalized saliency map output (PGM).
    #[arg(long, default_value = "saliency.pgm")]
    map: PathBuf,
    /// Structure-direction table output ("x y vx vy saliency" lines).
    #[arg(long)]
    rsv: Option<PathBuf>,
}

#[derive(Args)]
struct JsmArgs {
    reference: PathBuf,
    floating: PathBuf,
    /// Transform to evaluate the map at.
    #[command(flatten)]
    at: StartFlags,
    #[command(flatten)]
    cfg: ConfigFlags,
    /// Weight map output (PGM, weights scaled 0..255).
    #[arg(long, default_value = "jsm.pgm")]
    map: PathBuf,
}

fn run_register(args: &RegisterArgs) -> anyhow::Result<()> {
    let reference = io::load_image(&args.reference)?;
    let floating = io::load_image(&args.floating)?;
    let cfg = args.cfg.resolve()?;
    let result = register(&reference, &floating, &args.start.transform(), &cfg)?;
    println!("{}", result.record_line());
    if let Some(path) = &args.json {
        std::fs::write(path, result.to_json())?;
    }
    if let Some(path) = &args.overlay {
        edges::export_overlay(&reference, &floating, result.transform).save_png(path)?;
    }
    Ok(())
}

fn run_surface(args: &SurfaceArgs) -> anyhow::Result<()> {
    let reference = io::load_image(&args.reference)?;
    let floating = io::load_image(&args.floating)?;
    let cfg = args.cfg.resolve()?;
    let grid = similarity_surface(
        &reference,
        &floating,
        &args.center.transform(),
        &cfg,
        args.range,
        args.step,
    )?;
    std::fs::write(format!("{}.csv", args.out_prefix), grid.to_csv_string())?;
    io::write_pgm(format!("{}.pgm", args.out_prefix), &grid.heatmap())?;
    io::write_pgm(format!("{}_mask.pgm", args.out_prefix), &grid.mask())?;
    match grid.argmax() {
        Some((dx, dy, v)) => println!(
            "peak at offset ({dx:+.2}, {dy:+.2}) value {v:.6}; {} strict local maxima",
            grid.count_strict_local_maxima()
        ),
        None => println!("no scorable grid points"),
    }
    Ok(())
}

fn parse_patch(text: &str) -> anyhow::Result<(usize, usize, usize, usize)> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| anyhow::anyhow!("--patch expects four integers: x,y,width,height"))?;
    if parts.len() != 4 {
        anyhow::bail!("--patch expects four integers: x,y,width,height");
    }
    Ok((parts[0], parts[1], parts[2], parts[3]))
}

fn parse_shift(text: &str) -> anyhow::Result<(f64, f64)> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| anyhow::anyhow!("--patch-shift expects two numbers: dx,dy"))?;
    if parts.len() != 2 {
        anyhow::bail!("--patch-shift expects two numbers: dx,dy");
    }
    Ok((parts[0], parts[1]))
}

fn run_synth(args: &SynthArgs) -> anyhow::Result<()> {
    let outlier = match &args.patch {
        Some(text) => {
            let (x, y, width, height) = parse_patch(text)?;
            let (shift_x, shift_y) = parse_shift(&args.patch_shift)?;
            let target = match args.patch_in.as_str() {
                "reference" => PatchTarget::Reference,
                "floating" => PatchTarget::Floating,
                other => anyhow::bail!("--patch-in must be reference or floating, got {other}"),
            };
            Some(OutlierSpec {
                x,
                y,
                width,
                height,
                contrast: args.patch_contrast,
                target,
                shift_x,
                shift_y,
                twist: args.patch_twist,
            })
        }
        None => None,
    };
    let illumination = match (args.gain, args.bias) {
        (None, None) => None,
        (gain, bias) => Some(IlluminationSpec {
            gain: gain.unwrap_or(1.0),
            bias: bias.unwrap_or(0.0),
        }),
    };
    let spec = SyntheticCase {
        id: format!("seed-{}", args.seed),
        width: args.width,
        height: args.height,
        seed: args.seed,
        truth: args.truth.transform(),
        noise_sigma: args.noise,
        outlier,
        illumination,
    };
    let (reference, floating, truth) = generate_case(&spec)?;
    let ref_path = format!("{}_ref.pgm", args.out_prefix);
    let flt_path = format!("{}_flt.pgm", args.out_prefix);
    let truth_path = format!("{}_truth.txt", args.out_prefix);
    io::write_pgm(&ref_path, &reference)?;
    io::write_pgm(&flt_path, &floating)?;
    std::fs::write(
        &truth_path,
        format!("{:.6} {:.6} {:.6}\n", truth.tx, truth.ty, truth.beta),
    )?;
    println!("{ref_path} {flt_path} {truth_path}");
    Ok(())
}

fn run_bench(args: &BenchArgs) -> anyhow::Result<()> {
    let suite = bench::parse_suite_toml(&std::fs::read_to_string(&args.suite)?)?;
    let measures: Vec<MeasureSpec> = args
        .measures
        .split(',')
        .map(|m| measure_from_str(m.trim()))
        .collect::<Result<_, _>>()?;
    let cfg = args.cfg.resolve()?;
    let records = bench::run_benchmark(&suite, &measures, &cfg)?;
    std::fs::write(&args.csv, bench::records_to_csv(&records))?;
    let table = bench::format_table(&records);
    if let Some(path) = &args.table {
        std::fs::write(path, &table)?;
    }
    print!("{table}");
    Ok(())
}

fn run_saliency(args: &SaliencyArgs) -> anyhow::Result<()> {
    let img = io::load_image(&args.image)?;
    let levels = args
        .levels
        .unwrap_or_else(|| jsmreg::img::default_pyramid_levels(img.width(), img.height()));
    let (map, field) = saliency::build_rsv_field(&img, levels, args.threshold);
    io::write_normalized_pgm(&args.map, map.data(), map.width(), map.height())?;
    if let Some(path) = &args.rsv {
        std::fs::write(path, saliency::rsv_table_string(&map, &field))?;
    }
    println!(
        "{} of {} pixels carry a structure direction",
        field.valid_count(),
        img.width() * img.height()
    );
    Ok(())
}

fn run_jsm(args: &JsmArgs) -> anyhow::Result<()> {
    let reference = io::load_image(&args.reference)?;
    let floating = io::load_image(&args.floating)?;
    let cfg = args.cfg.resolve()?;
    let levels_r =
        jsmreg::img::default_pyramid_levels(reference.width(), reference.height());
    let levels_f = jsmreg::img::default_pyramid_levels(floating.width(), floating.height());
    let (_, ref_field) =
        saliency::build_rsv_field(&reference, levels_r, cfg.saliency_threshold);
    let (_, flt_field) =
        saliency::build_rsv_field(&floating, levels_f, cfg.saliency_threshold);
    let map = jsm::compute_jsm(&ref_field, &flt_field, &args.at.transform(), cfg.cosine_policy);
    // Weights are already in [0, 1]; write them unnormalized so maps from
    // different transforms are comparable.
    let img = jsmreg::img::Image::new(map.width(), map.height(), map.weights().to_vec())?;
    io::write_pgm(&args.map, &img)?;
    println!(
        "overlap {} px, mean weight {:.4}",
        map.overlap_count(),
        map.sum_weights() / map.overlap_count().max(1) as f64
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Register(a) => run_register(a),
        Cmd::Surface(a) => run_surface(a),
        Cmd::Synth(a) => run_synth(a),
        Cmd::Bench(a) => run_bench(a),
        Cmd::Saliency(a) => run_saliency(a),
        Cmd::Jsm(a) => run_jsm(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
