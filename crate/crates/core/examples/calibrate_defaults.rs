//! Measures the separation between clean-tile distances and per-kind
//! defect distances at the frozen default parameters. This is the tool
//! the shipped amplitudes/extents were tuned with; rerun it after
//! touching texture, noise, or defect geometry.
//!
//! Usage: cargo run --example calibrate_defaults [-- <seed>...]

use std::collections::BTreeMap;
use std::fs;

use tileinspect::imageio::load_pgm;
use tileinspect::inspect::{decompose_with, euclidean_distance, InspectConfig, Verdict};
use tileinspect::metrics::{calibrate_threshold, DEFAULT_CALIBRATION_MARGIN};
use tileinspect::synth::{generate_corpus, CorpusSpec, KIND_ROTATION};

fn main() {
    let seeds: Vec<u64> = {
        let args: Vec<u64> = std::env::args()
            .skip(1)
            .map(|a| a.parse().expect("seeds are u64"))
            .collect();
        if args.is_empty() {
            vec![1, 2, 3, 4, 5]
        } else {
            args
        }
    };

    for seed in seeds {
        let spec = CorpusSpec {
            seed,
            ..CorpusSpec::default()
        };
        let dir = std::env::temp_dir().join(format!("tileinspect-calibrate-{seed}"));
        let manifest = generate_corpus(&spec, &dir).expect("corpus generation");

        let config = InspectConfig::default();
        let reference =
            load_pgm(&fs::read(dir.join("ref.pgm")).expect("read ref")).expect("decode ref");
        let reference_ll = decompose_with(&reference, &config)
            .expect("decompose ref")
            .approximation;

        let mut clean = Vec::new();
        let mut per_kind: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        let mut defect_no = 0usize;
        for entry in &manifest.entries {
            let image = load_pgm(&fs::read(dir.join(&entry.path)).expect("read tile"))
                .expect("decode tile");
            let ll = decompose_with(&image, &config)
                .expect("decompose tile")
                .approximation;
            let distance = euclidean_distance(&reference_ll, &ll).expect("distance");
            match entry.label {
                Verdict::Ok => clean.push(distance),
                Verdict::Defective => {
                    let kind = KIND_ROTATION[defect_no % KIND_ROTATION.len()];
                    defect_no += 1;
                    per_kind.entry(kind.as_str()).or_default().push(distance);
                }
            }
        }

        let max_clean = clean.iter().cloned().fold(f64::MIN, f64::max);
        let threshold = calibrate_threshold(&clean, DEFAULT_CALIBRATION_MARGIN).expect("threshold");
        println!(
            "seed {seed}: clean n={} max={max_clean:.2} threshold={threshold:.2}",
            clean.len()
        );
        let mut misclassified = 0usize;
        for (kind, distances) in &per_kind {
            let min = distances.iter().cloned().fold(f64::MAX, f64::min);
            let below = distances.iter().filter(|&&d| d <= threshold).count();
            misclassified += below;
            println!(
                "  {kind:<9} n={:<2} min={min:>8.2} margin_over_threshold={:>5.2}x missed={below}",
                distances.len(),
                min / threshold,
            );
        }
        let total = manifest.entries.len();
        let ca = 100.0 * (total - misclassified) as f64 / total as f64;
        println!("  CA at calibrated threshold: {ca:.1}%");

        fs::remove_dir_all(&dir).expect("cleanup");
    }
}
