//! End-to-end training on rendered toy objects, followed by a held-out
//! evaluation.
//!
//! Run with `cargo run --release --example train_toy [STAGE1_ITERS] [STAGE2_ITERS] [OUT_DIR]`.
//! The defaults take a few minutes on one core; pass larger counts for a
//! converged model. The checkpoint and loss history land in OUT_DIR.

use std::path::PathBuf;
use std::time::Instant;

use orbitpose::eval::{equivariance_errors, evaluate, ErrorMode, ReferencePolicy};
use orbitpose::model::{ModelConfig, ModelParams};
use orbitpose::toydata::{build_dataset, DatasetSpec, Split};
use orbitpose::trainer::{history_csv, Trainer, TrainerConfig};

fn main() -> orbitpose::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let arg = |i: usize, default: u64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(default);
    let out = args
        .get(3)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("orbitpose_train"));
    std::fs::create_dir_all(&out).expect("create output directory");

    let dataset = build_dataset(&DatasetSpec::default())?;
    let cfg = TrainerConfig {
        stage1_iters: arg(1, 1500),
        stage2_iters: arg(2, 500),
        ..TrainerConfig::default()
    };
    let mut trainer = Trainer::new(ModelParams::init(ModelConfig::default())?, cfg.clone())?;
    println!(
        "{} parameters, {} + {} iterations, batch {}",
        trainer.params().parameter_count(),
        cfg.stage1_iters,
        cfg.stage2_iters,
        cfg.batch_size
    );

    let start = Instant::now();
    while !trainer.is_finished() {
        let report = trainer.step(&dataset)?;
        let iter = trainer.state().iteration;
        if iter % 250 == 0 {
            let avg = trainer.state().running;
            println!(
                "iter {iter:6}  {:6.1}s  total {:.4}  recon {:.5}  radius {:.4}  pair {:.4}  (last {:.4})",
                start.elapsed().as_secs_f64(),
                avg.total,
                avg.recon,
                avg.radius,
                avg.pair,
                report.total
            );
        }
    }

    let params = trainer.params();
    params.save(out.join("model.opose"))?;
    std::fs::write(out.join("loss_history.csv"), history_csv(trainer.history()))
        .expect("write loss history");

    let errs = equivariance_errors(params, &dataset, Split::HeldOut)?;
    let within = errs.iter().filter(|&&e| e < 5.0).count() as f64 / errs.len() as f64;
    let report = evaluate(params, &dataset, Split::HeldOut, ReferencePolicy::default())?;
    println!("held-out equivariance within 5 deg: {:.3}", within);
    println!(
        "held-out accuracy-36 {:.3}, nearby {:.3}, opposite {:.3}",
        report.accuracy_k,
        report.fraction(ErrorMode::Nearby),
        report.fraction(ErrorMode::Opposite)
    );
    println!("checkpoint written to {}", out.join("model.opose").display());
    Ok(())
}
