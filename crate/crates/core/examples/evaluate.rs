//! Gauged absolute-pose evaluation, error modes and the confusion matrix.
//!
//! Run with `cargo run --release --example evaluate [CHECKPOINT]`.
//! Without a checkpoint the orbits come straight from the ground-truth
//! labels, which exercises the metric and gauging with no learning involved.

use orbitpose::eval::{evaluate, EvalReport, OracleOrbits, ReferencePolicy};
use orbitpose::model::ModelParams;
use orbitpose::toydata::{build_dataset, DatasetSpec, Split};

fn summarise(name: &str, report: &EvalReport) {
    let c = &report.error_mode_counts;
    println!(
        "{name}: accuracy-{} {:.3} over {} views (exact {}, nearby {}, others {}, opposite {})",
        report.group_order,
        report.accuracy_k,
        report.records.len(),
        c.exact,
        c.nearby,
        c.others,
        c.opposite
    );
}

fn main() -> orbitpose::Result<()> {
    let dataset = build_dataset(&DatasetSpec::default())?;
    let oracle = OracleOrbits {
        c: 0.8,
        group: dataset.group(),
    };
    let report = evaluate(&oracle, &dataset, Split::HeldOut, ReferencePolicy::default())?;
    summarise("oracle orbits", &report);

    if let Some(path) = std::env::args().nth(1) {
        let params = ModelParams::load(&path)?;
        for policy in [
            ReferencePolicy::Single { seed: 0 },
            ReferencePolicy::PerObject { seed: 0 },
        ] {
            let report = evaluate(&params, &dataset, Split::HeldOut, policy)?;
            summarise(&format!("{path} ({policy:?})"), &report);
        }
        let report = evaluate(&params, &dataset, Split::HeldOut, ReferencePolicy::default())?;
        let diagonal: usize = (0..report.group_order).map(|k| report.confusion[k][k]).sum();
        println!("confusion diagonal holds {diagonal} of {} views", report.records.len());
    }
    Ok(())
}
