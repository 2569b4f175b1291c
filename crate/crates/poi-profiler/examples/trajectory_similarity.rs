//! Trajectory similarity with haversine-ground DTW: distance between two
//! paths, nearest-neighbor ranking over a candidate pool, and the
//! quadratic-vs-linear cost comparison against profile generation.
//!
//! Run with: cargo run --example trajectory_similarity

use poi_profiler::synth::synthetic_trajectories;
use poi_profiler::trajsim::{
    benchmark_to_markdown, complexity_benchmark, dtw_distance, haversine_meters, rank_similar,
};

fn main() -> poi_profiler::Result<()> {
    // One degree of latitude is about 111.2 km on the spherical model.
    let d = haversine_meters((40.0, -74.0), (41.0, -74.0));
    println!("1 degree of latitude: {:.1} km", d / 1000.0);

    let trajs = synthetic_trajectories(11, 60, 24);
    let a = &trajs[0];
    let b = &trajs[1];
    println!(
        "dtw({}, {}) = {:.1} m; dtw({}, {}) = 0 by identity",
        a.traj_id,
        b.traj_id,
        dtw_distance(a, b)?,
        a.traj_id,
        a.traj_id
    );
    assert_eq!(dtw_distance(a, a)?, 0.0);

    let ranking = rank_similar(a, &trajs)?;
    println!("\ntop 5 neighbors of trajectory {}:", a.traj_id);
    for (rank, n) in ranking.neighbors[..5].iter().enumerate() {
        println!("  #{:<2} trajectory {:>2}  {:>12.1} m", rank + 1, n.traj_id, n.distance_meters);
    }
    println!(
        "timing: {:.2} ms distances, {:.3} ms sort",
        ranking.timings.distance_nanos as f64 / 1e6,
        ranking.timings.sort_nanos as f64 / 1e6
    );

    // Pairwise DTW over L candidates costs C(L,2) quadratic alignments;
    // profile generation costs one model call per user. The benchmark
    // times both and checks the doubling ratio.
    let report = complexity_benchmark(&[50, 100, 200], 16, &[50, 100], 11)?;
    println!("\n{}", benchmark_to_markdown(&report));
    Ok(())
}
