//! Command-line front end: decompose, inspect, batch, and synth.
//!
//! Exit codes: 0 success (or OK verdict), 1 DEFECTIVE verdict (inspect
//! only), 2 usage error, 3 data error. Stdout carries the reports and is
//! deterministic; timing and diagnostics go to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use tileinspect::imageio::{load_manifest, load_pgm, save_pgm, save_pyramid, ManifestEntry};
use tileinspect::inspect::{
    classify, decompose_with, euclidean_distance, inspect_pair, InspectConfig, Verdict,
    DEFAULT_DISTANCE_THRESHOLD,
};
use tileinspect::metrics::{
    calibrate_threshold, confusion, LabeledVerdict, DEFAULT_CALIBRATION_MARGIN,
};
use tileinspect::synth::{generate_corpus, CorpusSpec, SynthError};
use tileinspect::wavelet::Image;

#[derive(Parser)]
#[command(
    name = "tileinspect",
    version,
    about = "Wavelet-based surface-defect inspection for grayscale tile images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a PGM image and write the pyramid to a file
    Dwt(DwtArgs),
    /// Compare a test tile against a reference tile
    Inspect(InspectArgs),
    /// Classify every tile in a manifest and report accuracy
    Batch(BatchArgs),
    /// Generate a labeled synthetic tile corpus
    Synth(SynthArgs),
}

#[derive(Args)]
struct DwtArgs {
    /// Input PGM image (P2 or P5)
    input: PathBuf,
    /// Decomposition depth
    #[arg(long, default_value_t = 3, value_parser = parse_levels)]
    levels: usize,
    /// Output pyramid file
    #[arg(long)]
    out: PathBuf,
    /// Pad by edge replication up to the next multiple of 2^levels
    #[arg(long)]
    pad: bool,
    /// Also print the summary as one JSON line
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct InspectArgs {
    /// Reference (defect-free) PGM image
    #[arg(long)]
    reference: PathBuf,
    /// Test PGM image
    #[arg(long)]
    test: PathBuf,
    /// Decomposition depth
    #[arg(long, default_value_t = 3, value_parser = parse_levels)]
    levels: usize,
    /// OK/DEFECTIVE decision threshold on the distance
    #[arg(long, default_value_t = DEFAULT_DISTANCE_THRESHOLD, value_parser = parse_nonnegative)]
    threshold: f64,
    /// Write a full-resolution defect map (white = defective) to this path
    #[arg(long)]
    map: Option<PathBuf>,
    /// Per-coefficient threshold used for the defect map
    #[arg(long, default_value_t = 1e-9, value_parser = parse_nonnegative)]
    map_threshold: f64,
    /// Pad by edge replication up to the next multiple of 2^levels
    #[arg(long)]
    pad: bool,
    /// Also print the result as one JSON line
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BatchArgs {
    /// Manifest CSV listing test images with truth labels
    #[arg(long)]
    manifest: PathBuf,
    /// Reference (defect-free) PGM image
    #[arg(long)]
    reference: PathBuf,
    /// Decomposition depth
    #[arg(long, default_value_t = 3, value_parser = parse_levels)]
    levels: usize,
    /// Fixed decision threshold on the distance
    #[arg(long, value_parser = parse_nonnegative, conflicts_with = "calibrate")]
    threshold: Option<f64>,
    /// Derive the threshold from the OK-labeled entries instead
    #[arg(long)]
    calibrate: bool,
    /// Worker threads for the per-image loop
    #[arg(long, default_value_t = 1, value_parser = parse_jobs)]
    jobs: usize,
    /// Pad by edge replication up to the next multiple of 2^levels
    #[arg(long)]
    pad: bool,
    /// Also print the report as one JSON line
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for ref.pgm, test images, and manifest.csv
    #[arg(long)]
    out: PathBuf,
    /// Tile side length (power of two, at least 8)
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Number of test images
    #[arg(long, default_value_t = 85)]
    count: usize,
    /// Fraction of test images that receive a defect
    #[arg(long, default_value_t = 0.5)]
    defect_ratio: f64,
    /// Standard deviation of per-pixel Gaussian noise
    #[arg(long, default_value_t = 2.0)]
    noise_sigma: f64,
    /// Root seed for the whole corpus
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also print the summary as one JSON line
    #[arg(long)]
    json: bool,
}

fn parse_levels(s: &str) -> Result<usize, String> {
    let levels: usize = s
        .parse()
        .map_err(|_| "level count must be a number".to_string())?;
    if (1..=24).contains(&levels) {
        Ok(levels)
    } else {
        Err("level count must be between 1 and 24".to_string())
    }
}

fn parse_jobs(s: &str) -> Result<usize, String> {
    let jobs: usize = s
        .parse()
        .map_err(|_| "job count must be a number".to_string())?;
    if (1..=1024).contains(&jobs) {
        Ok(jobs)
    } else {
        Err("job count must be between 1 and 1024".to_string())
    }
}

fn parse_nonnegative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| "must be a number".to_string())?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err("must be finite and nonnegative".to_string())
    }
}

/// A failed command: message for stderr plus the exit code to use.
struct Failure {
    code: u8,
    message: String,
}

fn data_failure(message: impl std::fmt::Display) -> Failure {
    Failure {
        code: 3,
        message: format!("error: {message}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = match cli.command {
        Command::Dwt(args) => cmd_dwt(args),
        Command::Inspect(args) => cmd_inspect(args),
        Command::Batch(args) => cmd_batch(args),
        Command::Synth(args) => cmd_synth(args),
    };
    eprintln!("elapsed_ms={}", start.elapsed().as_millis());
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("{}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn read_image(path: &Path) -> Result<Image, Failure> {
    let bytes =
        fs::read(path).map_err(|e| data_failure(format_args!("{}: {e}", path.display())))?;
    load_pgm(&bytes).map_err(|e| data_failure(format_args!("{}: {e}", path.display())))
}

fn cmd_dwt(args: DwtArgs) -> Result<ExitCode, Failure> {
    let image = read_image(&args.input)?;
    let pyramid = if args.pad {
        tileinspect::wavelet::decompose_padded(&image, args.levels)
    } else {
        tileinspect::wavelet::decompose(&image, args.levels)
    }
    .map_err(data_failure)?;

    fs::write(&args.out, save_pyramid(&pyramid))
        .map_err(|e| data_failure(format_args!("{}: {e}", args.out.display())))?;

    let energy = pyramid.total_energy();
    let detail_energy = pyramid.detail_energy();
    println!(
        "dims={}x{} levels={} matrices={} ll={}x{} energy={} detail_energy={}",
        image.rows(),
        image.cols(),
        pyramid.levels,
        pyramid.matrix_count(),
        pyramid.approximation.rows(),
        pyramid.approximation.cols(),
        energy,
        detail_energy
    );
    if args.json {
        let record = json!({
            "command": "dwt",
            "input": args.input.display().to_string(),
            "out": args.out.display().to_string(),
            "rows": image.rows(),
            "cols": image.cols(),
            "levels": pyramid.levels,
            "matrices": pyramid.matrix_count(),
            "ll_rows": pyramid.approximation.rows(),
            "ll_cols": pyramid.approximation.cols(),
            "energy": energy,
            "detail_energy": detail_energy,
            "padded": pyramid.is_padded(),
        });
        println!("{record}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_inspect(args: InspectArgs) -> Result<ExitCode, Failure> {
    let reference = read_image(&args.reference)?;
    let test = read_image(&args.test)?;
    let config = InspectConfig {
        levels: args.levels,
        distance_threshold: args.threshold,
        map_coeff_threshold: args.map.is_some().then_some(args.map_threshold),
        pad_enabled: args.pad,
    };
    let result = inspect_pair(&reference, &test, &config).map_err(data_failure)?;

    if let Some(map_path) = &args.map {
        // Map cells are 0/1; stretch to full contrast for viewing.
        let visual = result
            .defect_map_fullres
            .as_ref()
            .expect("map requested but not produced")
            .map(|v| v * 255.0);
        fs::write(map_path, save_pgm(&visual, true))
            .map_err(|e| data_failure(format_args!("{}: {e}", map_path.display())))?;
    }

    println!("distance={} verdict={}", result.distance, result.verdict);
    if args.json {
        let record = json!({
            "command": "inspect",
            "reference": args.reference.display().to_string(),
            "test": args.test.display().to_string(),
            "levels": args.levels,
            "threshold": args.threshold,
            "distance": result.distance,
            "verdict": result.verdict.as_str(),
        });
        println!("{record}");
    }
    Ok(match result.verdict {
        Verdict::Ok => ExitCode::SUCCESS,
        Verdict::Defective => ExitCode::from(1),
    })
}

/// Computes the distance of one manifest entry against the reference
/// approximation. Errors come back as printable strings so the batch can
/// report every bad file at once.
fn batch_distance(
    entry: &ManifestEntry,
    base_dir: &Path,
    reference_dims: (usize, usize),
    reference_ll: &Image,
    config: &InspectConfig,
) -> Result<f64, String> {
    let path = base_dir.join(&entry.path);
    let fail = |e: &dyn std::fmt::Display| format!("error: {}: {e}", path.display());
    let bytes = fs::read(&path).map_err(|e| fail(&e))?;
    let image = load_pgm(&bytes).map_err(|e| fail(&e))?;
    if (image.rows(), image.cols()) != reference_dims {
        return Err(fail(&format_args!(
            "is {}x{}, reference is {}x{}",
            image.rows(),
            image.cols(),
            reference_dims.0,
            reference_dims.1
        )));
    }
    let pyramid = decompose_with(&image, config).map_err(|e| fail(&e))?;
    euclidean_distance(reference_ll, &pyramid.approximation).map_err(|e| fail(&e))
}

/// Runs the per-image loop across `jobs` workers. Results land in manifest
/// order no matter how the work interleaves.
fn batch_distances(
    entries: &[ManifestEntry],
    base_dir: &Path,
    reference_dims: (usize, usize),
    reference_ll: &Image,
    config: &InspectConfig,
    jobs: usize,
) -> Vec<Result<f64, String>> {
    let n = entries.len();
    let results: Mutex<Vec<Option<Result<f64, String>>>> = Mutex::new(vec![None; n]);
    let cursor = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(n.max(1)) {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let result =
                    batch_distance(&entries[i], base_dir, reference_dims, reference_ll, config);
                results.lock().unwrap()[i] = Some(result);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every index visited"))
        .collect()
}

fn cmd_batch(args: BatchArgs) -> Result<ExitCode, Failure> {
    let manifest_bytes = fs::read(&args.manifest)
        .map_err(|e| data_failure(format_args!("{}: {e}", args.manifest.display())))?;
    let manifest = load_manifest(&manifest_bytes)
        .map_err(|e| data_failure(format_args!("{}: {e}", args.manifest.display())))?;
    // Manifest paths are relative to the manifest's own directory.
    let base_dir = args.manifest.parent().unwrap_or(Path::new("."));

    let reference = read_image(&args.reference)?;
    let mut config = InspectConfig {
        levels: args.levels,
        distance_threshold: DEFAULT_DISTANCE_THRESHOLD,
        map_coeff_threshold: None,
        pad_enabled: args.pad,
    };
    let reference_pyramid = decompose_with(&reference, &config).map_err(data_failure)?;

    let outcomes = batch_distances(
        &manifest.entries,
        base_dir,
        (reference.rows(), reference.cols()),
        &reference_pyramid.approximation,
        &config,
        args.jobs,
    );
    let file_errors: Vec<&String> = outcomes.iter().filter_map(|r| r.as_ref().err()).collect();
    if !file_errors.is_empty() {
        return Err(Failure {
            code: 3,
            message: file_errors
                .iter()
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
                .join("\n"),
        });
    }
    let distances: Vec<f64> = outcomes.into_iter().map(|r| r.unwrap()).collect();

    let calibrated = args.calibrate;
    let threshold = if calibrated {
        let clean: Vec<f64> = manifest
            .entries
            .iter()
            .zip(&distances)
            .filter(|(e, _)| e.label == Verdict::Ok)
            .map(|(_, &d)| d)
            .collect();
        calibrate_threshold(&clean, DEFAULT_CALIBRATION_MARGIN).map_err(data_failure)?
    } else {
        args.threshold.unwrap_or(DEFAULT_DISTANCE_THRESHOLD)
    };
    config.distance_threshold = threshold;

    let mut verdicts = Vec::with_capacity(manifest.entries.len());
    for (entry, &distance) in manifest.entries.iter().zip(&distances) {
        let predicted = classify(distance, &config).map_err(data_failure)?;
        verdicts.push(LabeledVerdict {
            image_id: entry.path.clone(),
            truth: entry.label,
            predicted,
            distance,
        });
    }
    let report = confusion(&verdicts).map_err(data_failure)?;

    println!("{report}");
    println!("threshold={threshold} calibrated={calibrated}");
    println!("CA={:.1}%", report.ca_percent);
    if args.json {
        let record = json!({
            "command": "batch",
            "manifest": args.manifest.display().to_string(),
            "reference": args.reference.display().to_string(),
            "levels": args.levels,
            "threshold": threshold,
            "calibrated": calibrated,
            "total": report.total,
            "correct": report.correct,
            "true_ok": report.true_ok,
            "true_defective": report.true_defective,
            "false_ok": report.false_ok,
            "false_defective": report.false_defective,
            "ca_percent": report.ca_percent,
        });
        println!("{record}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(args: SynthArgs) -> Result<ExitCode, Failure> {
    let spec = CorpusSpec {
        size: args.size,
        count: args.count,
        defect_ratio: args.defect_ratio,
        noise_sigma: args.noise_sigma,
        seed: args.seed,
    };
    spec.validate().map_err(|e| Failure {
        code: 2,
        message: format!("error: {e}"),
    })?;
    let manifest = generate_corpus(&spec, &args.out).map_err(|e| match e {
        SynthError::Io(_) => data_failure(e),
        // Parameters passed validate() above; whatever remains is data.
        other => data_failure(other),
    })?;

    let ok = manifest
        .entries
        .iter()
        .filter(|e| e.label == Verdict::Ok)
        .count();
    let defective = manifest.entries.len() - ok;
    let manifest_path = args.out.join("manifest.csv");
    println!(
        "manifest={} ok={ok} defective={defective}",
        manifest_path.display()
    );
    if args.json {
        let record = json!({
            "command": "synth",
            "manifest": manifest_path.display().to_string(),
            "size": spec.size,
            "count": spec.count,
            "defect_ratio": spec.defect_ratio,
            "noise_sigma": spec.noise_sigma,
            "seed": spec.seed,
            "ok": ok,
            "defective": defective,
        });
        println!("{record}");
    }
    Ok(ExitCode::SUCCESS)
}
