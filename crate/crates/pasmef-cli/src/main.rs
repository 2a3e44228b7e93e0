//! `pasmef`: fuse a directory of bracketed exposures into one PNG, or score
//! an existing fused image against its stack.
//!
//! Exit codes: 0 success, 1 runtime failure (unreadable inputs, mismatched
//! stacks, I/O), 2 usage errors (bad flags or configuration values).

use std::error::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pasmef::{
    fuse_stack_with_weights, load_stack, mef_ssim, read_image, write_png, write_png_gray,
    FusionConfig, FusionError, LevelCount, MefSsimConfig, WeightStack,
};

#[derive(Parser)]
#[command(
    name = "pasmef",
    version,
    about = "Multi-exposure fusion with PCA, exposedness, and saliency weights"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fuse an exposure stack into a single PNG.
    Fuse(FuseArgs),
    /// Score a fused image against its source stack (MEF-SSIM).
    Score(ScoreArgs),
}

#[derive(Args)]
struct FuseArgs {
    /// Directory holding the stack (PNG/JPEG/TIFF), ordered by filename.
    input_dir: PathBuf,

    /// Output PNG path.
    #[arg(short, long, value_name = "PATH")]
    output: PathBuf,

    /// Print the MEF-SSIM score of the fused result to stdout.
    #[arg(long)]
    metric: bool,

    /// Write per-exposure weight maps to a sibling directory of the output.
    #[arg(long)]
    dump_weights: bool,

    /// Pyramid depth: a positive level count, or "auto".
    #[arg(long, default_value = "auto", value_parser = parse_levels)]
    levels: LevelCount,

    /// Guided-filter radius in pixels.
    #[arg(long, value_name = "PIXELS")]
    gf_radius: Option<usize>,

    /// Guided-filter regularization.
    #[arg(long, value_name = "EPS")]
    gf_eps: Option<f64>,

    /// Gaussian sigma for smoothing PCA score maps.
    #[arg(long, value_name = "SIGMA")]
    pca_smooth_sigma: Option<f64>,

    /// Working width for saliency analysis.
    #[arg(long, value_name = "PIXELS")]
    saliency_width: Option<usize>,

    /// Worker threads: a positive count, or "auto" for one per core.
    /// Falls back to the PASMEF_THREADS environment variable.
    #[arg(long, value_name = "COUNT", value_parser = parse_threads)]
    threads: Option<ThreadCount>,
}

#[derive(Args)]
struct ScoreArgs {
    /// Directory holding the source stack.
    input_dir: PathBuf,

    /// Fused image to score.
    fused: PathBuf,

    /// Worker threads: a positive count, or "auto" for one per core.
    #[arg(long, value_name = "COUNT", value_parser = parse_threads)]
    threads: Option<ThreadCount>,
}

// Sequential builds parse the count for interface stability but never read
// it; the pipeline has no pool to size.
#[cfg_attr(not(feature = "parallel"), allow(dead_code))]
#[derive(Clone, Copy, Debug)]
enum ThreadCount {
    Auto,
    Fixed(usize),
}

fn parse_levels(s: &str) -> Result<LevelCount, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(LevelCount::Auto);
    }
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(LevelCount::Fixed(n)),
        _ => Err(format!(
            "expected a positive level count or \"auto\", got {s:?}"
        )),
    }
}

fn parse_threads(s: &str) -> Result<ThreadCount, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(ThreadCount::Auto);
    }
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(ThreadCount::Fixed(n)),
        _ => Err(format!(
            "expected a positive thread count or \"auto\", got {s:?}"
        )),
    }
}

/// Resolve the worker-thread request: the flag wins, then PASMEF_THREADS,
/// then auto. Errors are usage errors.
fn resolve_threads(flag: Option<ThreadCount>) -> Result<ThreadCount, String> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var("PASMEF_THREADS") {
        Ok(raw) => {
            parse_threads(raw.trim()).map_err(|e| format!("invalid PASMEF_THREADS value: {e}"))
        }
        Err(_) => Ok(ThreadCount::Auto),
    }
}

/// Pin the global worker pool when a fixed count was requested. Without the
/// parallel feature the pipeline is sequential and the request is a no-op.
fn apply_threads(threads: ThreadCount) -> Result<(), String> {
    #[cfg(feature = "parallel")]
    if let ThreadCount::Fixed(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| format!("failed to configure {n} worker threads: {e}"))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

/// Exit 2 paths: anything the user can fix by correcting the invocation.
fn usage_error(message: &str) -> ExitCode {
    eprintln!("pasmef: {message}");
    ExitCode::from(2)
}

/// Exit 1 paths: the invocation was fine but the work failed.
fn runtime_error(err: &dyn Error) -> ExitCode {
    eprintln!("pasmef: {err}");
    let mut cause = err.source();
    while let Some(c) = cause {
        eprintln!("  caused by: {c}");
        cause = c.source();
    }
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Fuse(args) => run_fuse(args),
        Command::Score(args) => run_score(args),
    }
}

fn run_fuse(args: FuseArgs) -> ExitCode {
    let threads = match resolve_threads(args.threads) {
        Ok(t) => t,
        Err(m) => return usage_error(&m),
    };
    if let Err(m) = apply_threads(threads) {
        return usage_error(&m);
    }

    let mut config = FusionConfig {
        pyramid_levels: args.levels,
        ..FusionConfig::default()
    };
    if let Some(r) = args.gf_radius {
        config.gf_radius = r;
    }
    if let Some(e) = args.gf_eps {
        config.gf_eps = e;
    }
    if let Some(s) = args.pca_smooth_sigma {
        config.pca_smooth_sigma = s;
    }
    if let Some(w) = args.saliency_width {
        config.saliency_width = w;
    }
    if let Err(e) = config.validate() {
        return usage_error(&e.to_string());
    }

    let stack = match load_stack(&args.input_dir) {
        Ok(s) => s,
        Err(e) => return runtime_error(&e),
    };
    let artifacts = match fuse_stack_with_weights(&stack, &config) {
        Ok(a) => a,
        Err(e) => return runtime_error(&e),
    };

    if let Err(e) = write_png(&args.output, &artifacts.fused) {
        return runtime_error(&e);
    }

    if args.dump_weights {
        if let Err(e) = dump_weights(&args.output, &artifacts) {
            return runtime_error(&e);
        }
    }

    if args.metric {
        match mef_ssim(&stack, &artifacts.fused, &MefSsimConfig::default()) {
            Ok(score) => println!("{score:.3}"),
            Err(e) => return runtime_error(&e),
        }
    }

    ExitCode::SUCCESS
}

fn run_score(args: ScoreArgs) -> ExitCode {
    let threads = match resolve_threads(args.threads) {
        Ok(t) => t,
        Err(m) => return usage_error(&m),
    };
    if let Err(m) = apply_threads(threads) {
        return usage_error(&m);
    }

    let stack = match load_stack(&args.input_dir) {
        Ok(s) => s,
        Err(e) => return runtime_error(&e),
    };
    let fused = match read_image(&args.fused) {
        Ok(i) => i,
        Err(e) => return runtime_error(&e),
    };
    match mef_ssim(&stack, &fused, &MefSsimConfig::default()) {
        Ok(score) => {
            println!("{score:.3}");
            ExitCode::SUCCESS
        }
        Err(e) => runtime_error(&e),
    }
}

/// Weight-dump directory for an output path: `out.png` -> `out_weights/`.
fn weights_dir(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "fused".to_string());
    output.with_file_name(format!("{stem}_weights"))
}

/// Write the per-branch and final weight maps as grayscale PNGs, values
/// mapped linearly from [0, 1] to 8 bits. Files are `<branch>_<index>.png`
/// with branches p (component scores), a (exposedness), s (saliency), and
/// w (final fusion weights).
fn dump_weights(output: &Path, artifacts: &pasmef::FusionArtifacts) -> Result<(), FusionError> {
    let dir = weights_dir(output);
    std::fs::create_dir_all(&dir)?;
    let branches: [(&str, &WeightStack); 4] = [
        ("p", &artifacts.pca),
        ("a", &artifacts.exposedness),
        ("s", &artifacts.saliency),
        ("w", &artifacts.fusion_weights),
    ];
    for (tag, stack) in branches {
        for (i, map) in stack.maps().iter().enumerate() {
            write_png_gray(&dir.join(format!("{tag}_{i:02}.png")), map)?;
        }
    }
    Ok(())
}
