//! Runs the pinned desk-scale benchmark and prints the paired-run
//! comparison plus the mislabel audit.
//!
//! ```sh
//! cargo run --release -p dropsample --example desk_benchmark
//! ```

use std::time::Instant;

use dropsample::trainer::{compare_dropsample, desk_benchmark, noise_audit};

fn main() {
    let spec = desk_benchmark();
    let (train_set, test_set) = spec.generate().expect("benchmark dataset");
    let m = train_set.len() as f64;
    println!(
        "benchmark: {} classes, {} train / {} test samples, {} iterations",
        spec.classes,
        train_set.len(),
        test_set.len(),
        spec.config.iterations
    );

    let start = Instant::now();
    let report = compare_dropsample(&train_set, &test_set, &spec.config).expect("paired run");
    println!("paired runs took {:.1} s", start.elapsed().as_secs_f64());

    println!("final accuracy   with sampler: {:.4}", report.final_accuracy_with);
    println!("final accuracy without sampler: {:.4}", report.final_accuracy_without);
    println!("target accuracy (best without): {:.4}", report.target_accuracy);
    println!(
        "iterations to target: with {:?}, without {}",
        report.iterations_with, report.iterations_without
    );
    println!("savings: {:?}", report.savings);

    let ess = report.with_log.records.last().map(|r| r.equivalent_set_size).unwrap_or(f64::NAN);
    println!("equivalent set size at end: {:.1} ({:.1}% of m)", ess, 100.0 * ess / m);

    let audit = noise_audit(&report.with_log, &train_set).expect("audit");
    println!(
        "noise audit: recall {:?}, false-drop {:?} ({} masked, {} clean)",
        audit.recall, audit.false_drop, audit.masked_total, audit.clean_total
    );

    // Trajectory snapshot for calibration: iteration, test error, ESS.
    println!("\n with-run trajectory:");
    for r in report.with_log.records.iter().step_by(8) {
        println!(
            "  t={:>6} err={:.4} ess={:>7.1} groups={:?} masked_low={:?}",
            r.iteration, r.test_error, r.equivalent_set_size, r.group_counts, r.masked_low_quota_frac
        );
    }
}
