//! Run every pipeline stage end to end against the bundled 20-user corpus
//! with seeded mock backends: ingest, sessionize, split, profile, judge,
//! SFT emission, prediction, evaluation, and cold-start analysis.
//!
//! The run is deterministic; repeating it against the same output
//! directory leaves every artifact byte-identical.
//!
//! Run with: cargo run --example full_pipeline

use std::path::Path;

use poi_profiler::pipeline::{run_full_pipeline, PipelineConfig};

fn main() -> poi_profiler::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let out = tempfile::tempdir().expect("tempdir");

    let cfg = PipelineConfig::golden(
        fixtures.join("checkins_20users.tsv"),
        Some(fixtures.join("boundary.geojson")),
        out.path().join("out"),
    );
    cfg.validate()?;

    for line in run_full_pipeline(&cfg)? {
        println!("{line}");
    }

    println!("\nartifacts under {}:", cfg.output_dir.display());
    let mut paths = Vec::new();
    collect(&cfg.output_dir, &mut paths);
    paths.sort();
    for p in paths {
        println!("  {}", p.strip_prefix(&cfg.output_dir).unwrap().display());
    }
    Ok(())
}

fn collect(dir: &Path, into: &mut Vec<std::path::PathBuf>) {
    for entry in std::fs::read_dir(dir).expect("read_dir").flatten() {
        let path = entry.path();
        if path.is_dir() {
            collect(&path, into);
        } else {
            into.push(path);
        }
    }
}
