//! Two-branch training with a shared parameter set.
//!
//! Each step encodes both views of every pair with the same weights, swaps
//! their pose units, expands each swapped pose into a full orbit, decodes
//! both K-image sequences, and takes one RMSProp step on the weighted
//! objective. The first stage uses synthetic pairs only; the second stage
//! raises the pair weight and adds pairs from the style-shifted split that
//! feed only the radius and pair terms.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::angle_steps;
use crate::model::ModelParams;
use crate::objective::{backward, Batch, LossReport, LossWeights, PairBatch, PixelNorm};
use crate::toydata::{Dataset, Split};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainerConfig {
    pub lr0: f64,
    pub gamma: f64,
    pub decay_every: u64,
    pub batch_size: usize,
    pub stage1_iters: u64,
    pub stage2_iters: u64,
    pub stage1_weights: LossWeights,
    pub stage2_weights: LossWeights,
    pub seed: u64,
    /// RMSProp smoothing constant.
    pub rho: f64,
    pub epsilon: f64,
    pub pixel_norm: PixelNorm,
    /// Write a checkpoint every this many iterations; 0 disables.
    pub checkpoint_every: u64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            lr0: 2e-4,
            gamma: 0.95,
            decay_every: 1000,
            batch_size: 4,
            stage1_iters: 6000,
            stage2_iters: 2000,
            stage1_weights: LossWeights::STAGE1,
            stage2_weights: LossWeights::STAGE2,
            seed: 0,
            rho: 0.9,
            epsilon: 1e-8,
            pixel_norm: PixelNorm::PerPixel,
            checkpoint_every: 0,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParam(msg.to_string()));
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return bad("lr0 must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if self.decay_every == 0 {
            return bad("decay_every must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(0.0..1.0).contains(&self.rho) || !(self.epsilon > 0.0) {
            return bad("rho must lie in [0, 1) and epsilon be positive");
        }
        LossWeights::new(
            self.stage1_weights.recon,
            self.stage1_weights.radius,
            self.stage1_weights.pair,
        )?;
        LossWeights::new(
            self.stage2_weights.recon,
            self.stage2_weights.radius,
            self.stage2_weights.pair,
        )?;
        Ok(())
    }

    pub fn total_iters(&self) -> u64 {
        self.stage1_iters + self.stage2_iters
    }

    pub fn weights_at(&self, iter: u64) -> LossWeights {
        if iter < self.stage1_iters {
            self.stage1_weights
        } else {
            self.stage2_weights
        }
    }
}

/// `lr0 · γ^⌊iter / decay_every⌋`
pub fn lr_at(iter: u64, cfg: &TrainerConfig) -> f64 {
    cfg.lr0 * cfg.gamma.powi((iter / cfg.decay_every) as i32)
}

/// Draw `batch_size` pairs, each two views of one object at independent
/// grid poses and a shared elevation.
pub fn sample_pair_batch<R: Rng>(
    dataset: &Dataset,
    split: Split,
    batch_size: usize,
    with_targets: bool,
    rng: &mut R,
) -> Result<PairBatch> {
    let objects = dataset.split(split);
    if objects.is_empty() {
        return Err(Error::Dataset(format!("split {split:?} has no objects")));
    }
    let group = dataset.group();
    let k = group.order();
    let d = dataset.image_len();
    let mut images_i = Array2::zeros((batch_size, d));
    let mut images_j = Array2::zeros((batch_size, d));
    let mut targets = with_targets.then(|| Array2::zeros((2 * batch_size * k, d)));
    let (mut theta_i, mut theta_j, mut steps) = (Vec::new(), Vec::new(), Vec::new());

    let copy = |dst: ndarray::ArrayViewMut1<f64>, src: &[f32]| {
        for (a, &b) in dst.into_iter().zip(src) {
            *a = b as f64;
        }
    };
    for n in 0..batch_size {
        let obj = objects[rng.random_range(0..objects.len())];
        if !obj.is_complete() {
            return Err(Error::Dataset(format!(
                "object {} lacks full {k}-view coverage",
                obj.object_id
            )));
        }
        let e = rng.random_range(0..obj.n_elevations());
        let pi = rng.random_range(0..k);
        let pj = rng.random_range(0..k);
        let (vi, vj) = (obj.view(e, pi), obj.view(e, pj));
        copy(images_i.row_mut(n), vi.image);
        copy(images_j.row_mut(n), vj.image);
        steps.push(angle_steps(vi.theta, vj.theta, group)?);
        theta_i.push(vi.theta);
        theta_j.push(vj.theta);
        if let Some(t) = targets.as_mut() {
            for step in 0..k {
                copy(t.row_mut((n * 2) * k + step), obj.image(e, pj + step));
                copy(t.row_mut((n * 2 + 1) * k + step), obj.image(e, pi + step));
            }
        }
    }
    Ok(PairBatch {
        images_i,
        images_j,
        theta_i,
        theta_j,
        steps,
        targets,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub params: ModelParams,
    /// Mean squared gradient per parameter tensor.
    pub accumulators: Vec<Vec<f64>>,
    pub iteration: u64,
    /// Exponential moving average of recent reports.
    pub running: LossReport,
}

impl TrainState {
    pub fn new(params: ModelParams) -> Self {
        let accumulators = params.tensors().iter().map(|(_, t)| vec![0.0; t.len()]).collect();
        Self {
            params,
            accumulators,
            iteration: 0,
            running: LossReport::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub iter: u64,
    pub lr: f64,
    pub report: LossReport,
}

pub fn history_csv(rows: &[HistoryRow]) -> String {
    let mut out = String::from("iter,lr,recon,radius,pair,total\n");
    for r in rows {
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e}",
            r.iter, r.lr, r.report.recon, r.report.radius, r.report.pair, r.report.total
        )
        .expect("writing to a String");
    }
    out
}

/// One optimisation step on a prepared batch.
pub fn train_step(
    state: &mut TrainState,
    batch: &Batch,
    weights: LossWeights,
    cfg: &TrainerConfig,
) -> Result<LossReport> {
    let lr = lr_at(state.iteration, cfg);
    let (report, grads) = backward(&state.params, batch, weights, cfg.pixel_norm)?;
    if !report.is_finite() {
        return Err(Error::NonFiniteLoss {
            iter: state.iteration,
            snapshot: Box::new(state.params.clone()),
        });
    }
    let (rho, eps) = (cfg.rho, cfg.epsilon);
    for ((w, acc), (_, g)) in state
        .params
        .tensors_mut()
        .into_iter()
        .zip(state.accumulators.iter_mut())
        .zip(grads.tensors())
    {
        for ((w, a), &g) in w.iter_mut().zip(acc.iter_mut()).zip(g) {
            *a = rho * *a + (1.0 - rho) * g * g;
            *w -= lr * g / (*a + eps).sqrt();
        }
    }
    let blend = |old: f64, new: f64| if state.iteration == 0 { new } else { 0.98 * old + 0.02 * new };
    state.running = LossReport {
        recon: blend(state.running.recon, report.recon),
        radius: blend(state.running.radius, report.radius),
        pair: blend(state.running.pair, report.pair),
        total: blend(state.running.total, report.total),
    };
    state.iteration += 1;
    Ok(report)
}

/// Owns the training state and the sampling stream for a full run.
pub struct Trainer {
    cfg: TrainerConfig,
    state: TrainState,
    rng: ChaCha8Rng,
    history: Vec<HistoryRow>,
}

impl Trainer {
    pub fn new(params: ModelParams, cfg: TrainerConfig) -> Result<Self> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Self {
            cfg,
            state: TrainState::new(params),
            rng,
            history: Vec::new(),
        })
    }

    pub fn config(&self) -> &TrainerConfig {
        &self.cfg
    }

    pub fn state(&self) -> &TrainState {
        &self.state
    }

    pub fn params(&self) -> &ModelParams {
        &self.state.params
    }

    pub fn history(&self) -> &[HistoryRow] {
        &self.history
    }

    pub fn is_finished(&self) -> bool {
        self.state.iteration >= self.cfg.total_iters()
    }

    fn check_dataset(&self, dataset: &Dataset) -> Result<()> {
        let mc = self.state.params.config();
        if dataset.image_len() != mc.pixels() || dataset.group() != mc.group {
            return Err(Error::Dataset(format!(
                "dataset images ({} values, K={}) do not fit the model ({} values, K={})",
                dataset.image_len(),
                dataset.group().order(),
                mc.pixels(),
                mc.group.order()
            )));
        }
        Ok(())
    }

    /// Sample a batch for the current stage and take one step.
    pub fn step(&mut self, dataset: &Dataset) -> Result<LossReport> {
        self.check_dataset(dataset)?;
        let iter = self.state.iteration;
        let n = self.cfg.batch_size;
        let full = sample_pair_batch(dataset, Split::Train, n, true, &mut self.rng)?;
        let second_stage = iter >= self.cfg.stage1_iters;
        let constraints_only = if second_stage && !dataset.split(Split::StyleShifted).is_empty() {
            Some(sample_pair_batch(dataset, Split::StyleShifted, n, false, &mut self.rng)?)
        } else {
            None
        };
        let batch = Batch {
            full,
            constraints_only,
        };
        let lr = lr_at(iter, &self.cfg);
        let report = train_step(&mut self.state, &batch, self.cfg.weights_at(iter), &self.cfg)?;
        self.history.push(HistoryRow { iter, lr, report });
        Ok(report)
    }

    /// Train to the end of the schedule, checkpointing into `checkpoint_dir`
    /// when given and `checkpoint_every > 0`.
    pub fn run(&mut self, dataset: &Dataset, checkpoint_dir: Option<&Path>) -> Result<()> {
        while !self.is_finished() {
            self.step(dataset)?;
            let done = self.state.iteration;
            if let Some(dir) = checkpoint_dir {
                if self.cfg.checkpoint_every > 0 && done % self.cfg.checkpoint_every == 0 {
                    self.state
                        .params
                        .save(dir.join(format!("checkpoint_{done:07}.opose")))?;
                }
            }
        }
        Ok(())
    }

    pub fn into_parts(self) -> (ModelParams, Vec<HistoryRow>) {
        (self.state.params, self.history)
    }
}

/// Full two-stage run from an initialised model.
pub fn train(
    dataset: &Dataset,
    params: ModelParams,
    cfg: &TrainerConfig,
    checkpoint_dir: Option<&Path>,
) -> Result<(ModelParams, Vec<HistoryRow>)> {
    let mut trainer = Trainer::new(params, cfg.clone())?;
    trainer.run(dataset, checkpoint_dir)?;
    Ok(trainer.into_parts())
}

/// Medians of consecutive `window`-iteration blocks of the total loss,
/// computed separately for each stage. Trailing partial blocks are dropped.
pub fn windowed_medians(history: &[HistoryRow], cfg: &TrainerConfig, window: usize) -> Vec<Vec<f64>> {
    let split = |stage1: bool| -> Vec<f64> {
        let values: Vec<f64> = history
            .iter()
            .filter(|r| (r.iter < cfg.stage1_iters) == stage1)
            .map(|r| r.report.total)
            .collect();
        values
            .chunks_exact(window)
            .map(|c| {
                let mut v = c.to_vec();
                v.sort_by(f64::total_cmp);
                let m = v.len() / 2;
                if v.len() % 2 == 0 {
                    0.5 * (v[m - 1] + v[m])
                } else {
                    v[m]
                }
            })
            .collect()
    };
    vec![split(true), split(false)]
}
