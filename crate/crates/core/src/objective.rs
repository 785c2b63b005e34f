//! Latent-space constraints, reconstruction loss, and the reverse pass of
//! the weighted objective through both branches.

use ndarray::{s, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::group::{mat2_apply_transpose, LatentGenerator};
use crate::model::{Gradients, ModelParams};

/// Weights of reconstruction, radius, and pair terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub recon: f64,
    pub radius: f64,
    pub pair: f64,
}

impl LossWeights {
    pub const STAGE1: LossWeights = LossWeights {
        recon: 100.0,
        radius: 1.0,
        pair: 3.0,
    };
    pub const STAGE2: LossWeights = LossWeights {
        recon: 100.0,
        radius: 1.0,
        pair: 5.0,
    };

    pub fn new(recon: f64, radius: f64, pair: f64) -> Result<Self> {
        let w = Self { recon, radius, pair };
        if [recon, radius, pair].iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParam(format!(
                "loss weights must be finite and nonnegative, got {w:?}"
            )));
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossReport {
    pub recon: f64,
    pub radius: f64,
    pub pair: f64,
    pub total: f64,
}

impl LossReport {
    pub fn is_finite(&self) -> bool {
        [self.recon, self.radius, self.pair, self.total]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// How the squared error of one image is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PixelNorm {
    /// Divide by the pixel count so the scale does not depend on image size.
    #[default]
    PerPixel,
    /// Plain sum of squares.
    Sum,
}

/// `|c − ‖f_pose‖₂|`
pub fn radius_loss(f_pose: [f64; 2], c: f64) -> f64 {
    (c - f_pose[0].hypot(f_pose[1])).abs()
}

/// Subgradient of [`radius_loss`]; zero on the circle and at the origin.
fn radius_grad(f_pose: [f64; 2], c: f64) -> [f64; 2] {
    let r = f_pose[0].hypot(f_pose[1]);
    if r == 0.0 || r == c {
        return [0.0, 0.0];
    }
    let s = if r > c { 1.0 } else { -1.0 };
    [s * f_pose[0] / r, s * f_pose[1] / r]
}

/// `‖fp2 − p^N·fp1‖₂`
pub fn pair_loss(fp1: [f64; 2], fp2: [f64; 2], n_steps: usize, p: &LatentGenerator) -> f64 {
    let advanced = p.apply_power(n_steps as i64, fp1);
    (fp2[0] - advanced[0]).hypot(fp2[1] - advanced[1])
}

/// Gradients of [`pair_loss`] w.r.t. `(fp1, fp2)`, zero where the loss is.
fn pair_grad(
    fp1: [f64; 2],
    fp2: [f64; 2],
    n_steps: usize,
    p: &LatentGenerator,
) -> ([f64; 2], [f64; 2]) {
    let advanced = p.apply_power(n_steps as i64, fp1);
    let d = [fp2[0] - advanced[0], fp2[1] - advanced[1]];
    let norm = d[0].hypot(d[1]);
    if norm == 0.0 {
        return ([0.0; 2], [0.0; 2]);
    }
    let u = [d[0] / norm, d[1] / norm];
    let back = mat2_apply_transpose(p.power(n_steps as i64), u);
    ([-back[0], -back[1]], u)
}

/// Mean squared reconstruction error over both branches,
/// `1/(2·K·N_b) · Σ ‖X_decoder − X_gt‖²`.
///
/// `decoded` and `targets` hold one image per row, `2·K·batch_size` rows in
/// total (every branch of every pair contributes its K-image sequence).
pub fn recon_loss(
    decoded: ArrayView2<f64>,
    targets: ArrayView2<f64>,
    k: usize,
    batch_size: usize,
    norm: PixelNorm,
) -> Result<f64> {
    let rows = 2 * k * batch_size;
    if decoded.dim() != targets.dim() {
        return Err(Error::DimensionMismatch {
            context: "reconstruction targets",
            expected: decoded.len(),
            actual: targets.len(),
        });
    }
    if decoded.nrows() != rows {
        return Err(Error::DimensionMismatch {
            context: "reconstruction rows (2·K·N_b)",
            expected: rows,
            actual: decoded.nrows(),
        });
    }
    if rows == 0 {
        return Err(Error::EmptyInput("reconstruction batch"));
    }
    let sq = compensated_sum(decoded.iter().zip(targets.iter()).map(|(a, b)| (a - b) * (a - b)));
    Ok(sq / (pixel_divisor(norm, decoded.ncols()) * rows as f64))
}

/// Neumaier summation. The reconstruction sum has hundreds of thousands of
/// terms and carries a large weight, so naive accumulation error would
/// swamp small finite-difference steps.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + carry
}

fn pixel_divisor(norm: PixelNorm, pixels: usize) -> f64 {
    match norm {
        PixelNorm::PerPixel => pixels as f64,
        PixelNorm::Sum => 1.0,
    }
}

/// `β₁·recon + β₂·radius + β₃·pair`
pub fn total_loss(recon: f64, radius: f64, pair: f64, weights: LossWeights) -> LossReport {
    LossReport {
        recon,
        radius,
        pair,
        total: weights.recon * recon + weights.radius * radius + weights.pair * pair,
    }
}

/// Pairs of views of the same object.
///
/// Row `n` of `images_i` / `images_j` is the pair's first / second view.
/// When present, `targets` holds `2·K·N` ground-truth images ordered by
/// pair, then branch (i before j), then orbit step: branch i's row k is the
/// object's view at pose `θ_j + k·Δθ`, branch j's row k the view at
/// `θ_i + k·Δθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBatch {
    pub images_i: Array2<f64>,
    pub images_j: Array2<f64>,
    pub theta_i: Vec<f64>,
    pub theta_j: Vec<f64>,
    /// Generator steps from `θ_i` to `θ_j`.
    pub steps: Vec<usize>,
    pub targets: Option<Array2<f64>>,
}

impl PairBatch {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    fn stacked_inputs(&self) -> Array2<f64> {
        ndarray::concatenate![ndarray::Axis(0), self.images_i, self.images_j]
    }
}

/// One optimisation batch: pairs used for every loss term, plus optional
/// pairs that only feed the latent constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub full: PairBatch,
    pub constraints_only: Option<PairBatch>,
}

impl Batch {
    pub fn new(full: PairBatch) -> Self {
        Self {
            full,
            constraints_only: None,
        }
    }
}

/// Pose rows of an encoded pair batch: `poses[n]` for view i, `poses[N+n]`
/// for view j.
fn poses_of(codes: &Array2<f64>, d_id: usize) -> Vec<[f64; 2]> {
    codes
        .rows()
        .into_iter()
        .map(|r| [r[d_id], r[d_id + 1]])
        .collect()
}

struct ConstraintTerms {
    radius_sum: f64,
    pair_sum: f64,
    n_poses: usize,
    n_pairs: usize,
}

fn constraint_sums(poses: &[[f64; 2]], batch: &PairBatch, c: f64, p: &LatentGenerator) -> ConstraintTerms {
    let n = batch.len();
    ConstraintTerms {
        radius_sum: poses.iter().map(|&f| radius_loss(f, c)).sum(),
        pair_sum: (0..n)
            .map(|i| pair_loss(poses[i], poses[n + i], batch.steps[i], p))
            .sum(),
        n_poses: poses.len(),
        n_pairs: n,
    }
}

/// Decoder input rows after the pose swap, one K-step orbit per branch.
fn decoder_inputs(codes: &Array2<f64>, d_id: usize, n: usize, p: &LatentGenerator) -> Array2<f64> {
    let k = p.group().order();
    let width = codes.ncols();
    let mut z = Array2::zeros((2 * n * k, width));
    for pair in 0..n {
        for branch in 0..2 {
            let (own, other) = if branch == 0 { (pair, n + pair) } else { (n + pair, pair) };
            let f_id = codes.slice(s![own, ..d_id]);
            let f_pose = [codes[[other, d_id]], codes[[other, d_id + 1]]];
            for step in 0..k {
                let row = (pair * 2 + branch) * k + step;
                z.slice_mut(s![row, ..d_id]).assign(&f_id);
                let q = p.apply_power(step as i64, f_pose);
                z[[row, d_id]] = q[0];
                z[[row, d_id + 1]] = q[1];
            }
        }
    }
    z
}

fn validate_batch(params: &ModelParams, batch: &PairBatch, needs_targets: bool) -> Result<()> {
    let cfg = params.config();
    let n = batch.len();
    if n == 0 {
        return Err(Error::EmptyInput("pair batch"));
    }
    for (context, actual) in [
        ("second views", batch.images_j.nrows()),
        ("first views", batch.images_i.nrows()),
        ("pose labels", batch.theta_i.len()),
        ("pose labels", batch.theta_j.len()),
    ] {
        if actual != n {
            return Err(Error::DimensionMismatch {
                context,
                expected: n,
                actual,
            });
        }
    }
    if needs_targets {
        let rows = 2 * n * cfg.group.order();
        match &batch.targets {
            None => return Err(Error::EmptyInput("reconstruction targets")),
            Some(t) if t.dim() != (rows, cfg.pixels()) => {
                return Err(Error::DimensionMismatch {
                    context: "reconstruction targets",
                    expected: rows * cfg.pixels(),
                    actual: t.len(),
                })
            }
            Some(_) => {}
        }
    }
    Ok(())
}

/// Loss of the full objective without gradients.
pub fn evaluate(
    params: &ModelParams,
    batch: &Batch,
    weights: LossWeights,
    norm: PixelNorm,
) -> Result<LossReport> {
    forward_backward(params, batch, weights, norm, false).map(|(report, _)| report)
}

/// ReLU on/off state of every unit the loss passes through for `batch`.
///
/// The loss is piecewise smooth, and two parameter settings with equal
/// patterns lie on the same piece. Gradient checks use this to discard
/// finite differences whose interval straddles a kink.
pub fn relu_pattern(params: &ModelParams, batch: &Batch) -> Result<Vec<bool>> {
    let cfg = params.config();
    let full = &batch.full;
    validate_batch(params, full, false)?;
    let mut mask = Vec::new();
    let enc = params.encode_traced(full.stacked_inputs().view())?;
    enc.0.active_units(params.encoder_activation(), &mut mask);
    let z = decoder_inputs(&enc.0.output, cfg.d_id, full.len(), &params.generator());
    let dec = params.decode_traced(z.view())?;
    dec.0.active_units(params.decoder_activation(), &mut mask);
    if let Some(extra) = &batch.constraints_only {
        validate_batch(params, extra, false)?;
        let trace = params.encode_traced(extra.stacked_inputs().view())?;
        trace.0.active_units(params.encoder_activation(), &mut mask);
    }
    Ok(mask)
}

/// Loss and its gradient with respect to every parameter tensor.
///
/// The orbit construction is a fixed linear map per step, so the gradient
/// reaching orbit element k is pulled back through `(p^k)ᵀ`. The pose swap
/// is a permutation: decoder gradients on branch i's pose units land on the
/// encoder output of view j and vice versa.
pub fn backward(
    params: &ModelParams,
    batch: &Batch,
    weights: LossWeights,
    norm: PixelNorm,
) -> Result<(LossReport, Gradients)> {
    let (report, grads) = forward_backward(params, batch, weights, norm, true)?;
    let grads = grads.expect("gradients requested");
    grads.check_finite()?;
    Ok((report, grads))
}

fn forward_backward(
    params: &ModelParams,
    batch: &Batch,
    weights: LossWeights,
    norm: PixelNorm,
    want_grads: bool,
) -> Result<(LossReport, Option<Gradients>)> {
    let cfg = params.config();
    let d_id = cfg.d_id;
    let c = cfg.c;
    let k = cfg.group.order();
    let p = params.generator();
    let full = &batch.full;
    validate_batch(params, full, true)?;
    if let Some(extra) = &batch.constraints_only {
        validate_batch(params, extra, false)?;
    }
    let n = full.len();

    // Both views of every pair go through the one shared encoder.
    let enc = params.encode_traced(full.stacked_inputs().view())?;
    let codes = &enc.0.output;
    let poses = poses_of(codes, d_id);

    let z = decoder_inputs(codes, d_id, n, &p);
    let dec = params.decode_traced(z.view())?;
    let targets = full.targets.as_ref().expect("validated");
    let recon = recon_loss(dec.0.output.view(), targets.view(), k, n, norm)?;

    let mut terms = vec![constraint_sums(&poses, full, c, &p)];
    let extra = match &batch.constraints_only {
        Some(b) => {
            let trace = params.encode_traced(b.stacked_inputs().view())?;
            let extra_poses = poses_of(&trace.0.output, d_id);
            terms.push(constraint_sums(&extra_poses, b, c, &p));
            Some((b, trace, extra_poses))
        }
        None => None,
    };
    let n_poses: usize = terms.iter().map(|t| t.n_poses).sum();
    let n_pairs: usize = terms.iter().map(|t| t.n_pairs).sum();
    let radius = terms.iter().map(|t| t.radius_sum).sum::<f64>() / n_poses as f64;
    let pair = terms.iter().map(|t| t.pair_sum).sum::<f64>() / n_pairs as f64;
    let report = total_loss(recon, radius, pair, weights);
    if !want_grads {
        return Ok((report, None));
    }

    let mut grads = Gradients::zeros_like(params);
    let radius_scale = weights.radius / n_poses as f64;
    let pair_scale = weights.pair / n_pairs as f64;

    // Reconstruction term through the decoder.
    let scale = weights.recon * 2.0 / (pixel_divisor(norm, cfg.pixels()) * (2 * k * n) as f64);
    let d_out = (&dec.0.output - targets) * scale;
    let dz = params
        .decoder
        .backward(&dec.0, d_out, &mut grads.decoder, true)
        .expect("input gradient requested");

    let mut d_codes = Array2::<f64>::zeros(codes.raw_dim());
    for pair_idx in 0..n {
        for branch in 0..2 {
            let (own, other) = if branch == 0 {
                (pair_idx, n + pair_idx)
            } else {
                (n + pair_idx, pair_idx)
            };
            for step in 0..k {
                let row = (pair_idx * 2 + branch) * k + step;
                let mut id_grad = d_codes.slice_mut(s![own, ..d_id]);
                id_grad += &dz.slice(s![row, ..d_id]);
                let back = mat2_apply_transpose(
                    p.power(step as i64),
                    [dz[[row, d_id]], dz[[row, d_id + 1]]],
                );
                d_codes[[other, d_id]] += back[0];
                d_codes[[other, d_id + 1]] += back[1];
            }
        }
    }
    add_constraint_grads(&mut d_codes, &poses, full, d_id, c, &p, radius_scale, pair_scale);
    params.encoder.backward(&enc.0, d_codes, &mut grads.encoder, false);

    if let Some((b, trace, extra_poses)) = extra {
        let mut d_extra = Array2::<f64>::zeros(trace.0.output.raw_dim());
        add_constraint_grads(&mut d_extra, &extra_poses, b, d_id, c, &p, radius_scale, pair_scale);
        params.encoder.backward(&trace.0, d_extra, &mut grads.encoder, false);
    }
    Ok((report, Some(grads)))
}

#[allow(clippy::too_many_arguments)]
fn add_constraint_grads(
    d_codes: &mut Array2<f64>,
    poses: &[[f64; 2]],
    batch: &PairBatch,
    d_id: usize,
    c: f64,
    p: &LatentGenerator,
    radius_scale: f64,
    pair_scale: f64,
) {
    for (row, &f) in poses.iter().enumerate() {
        let g = radius_grad(f, c);
        d_codes[[row, d_id]] += radius_scale * g[0];
        d_codes[[row, d_id + 1]] += radius_scale * g[1];
    }
    let n = batch.len();
    for i in 0..n {
        let (g1, g2) = pair_grad(poses[i], poses[n + i], batch.steps[i], p);
        d_codes[[i, d_id]] += pair_scale * g1[0];
        d_codes[[i, d_id + 1]] += pair_scale * g1[1];
        d_codes[[n + i, d_id]] += pair_scale * g2[0];
        d_codes[[n + i, d_id + 1]] += pair_scale * g2[1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupParams;
    use crate::model::ModelConfig;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn radius_examples() {
        assert_eq!(radius_loss([0.8, 0.0], 0.8), 0.0);
        assert_eq!(radius_loss([0.0, 0.0], 0.8), 0.8);
        assert!((radius_loss([0.3, 0.4], 0.8) - 0.3).abs() < 1e-15);
        assert_eq!(radius_grad([0.8, 0.0], 0.8), [0.0, 0.0]);
        assert_eq!(radius_grad([0.0, 0.0], 0.8), [0.0, 0.0]);
    }

    #[test]
    fn pair_examples() {
        let p = LatentGenerator::new(GroupParams::default());
        assert!(pair_loss([0.8, 0.0], [0.0, 0.8], 9, &p) < 1e-9);
        assert_eq!(pair_loss([0.3, 0.1], [0.3, 0.1], 0, &p), 0.0);
        assert!((pair_loss([0.8, 0.0], [0.8, 0.0], 18, &p) - 1.6).abs() < 1e-12);
    }

    #[test]
    fn recon_examples() {
        let d = 12;
        let gt = Array2::from_elem((2, d), 0.5);
        assert_eq!(recon_loss(gt.view(), gt.view(), 1, 1, PixelNorm::Sum).unwrap(), 0.0);

        let mut decoded = gt.clone();
        decoded.row_mut(0).mapv_inplace(|v| v + 0.1);
        let got = recon_loss(decoded.view(), gt.view(), 1, 1, PixelNorm::Sum).unwrap();
        let want = 0.1f64.powi(2) * d as f64 / 2.0;
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        let per_pixel = recon_loss(decoded.view(), gt.view(), 1, 1, PixelNorm::PerPixel).unwrap();
        assert!((per_pixel - want / d as f64).abs() < 1e-12);

        assert!(recon_loss(decoded.view(), gt.view(), 2, 1, PixelNorm::Sum).is_err());
        let short = Array2::zeros((2, d - 1));
        assert!(recon_loss(decoded.view(), short.view(), 1, 1, PixelNorm::Sum).is_err());
    }

    #[test]
    fn total_examples() {
        assert_eq!(total_loss(0.0, 0.0, 0.0, LossWeights::STAGE1).total, 0.0);
        let r1 = total_loss(0.01, 0.1, 0.2, LossWeights::STAGE1);
        assert!((r1.total - 1.7).abs() < 1e-12);
        let r2 = total_loss(0.01, 0.1, 0.2, LossWeights::STAGE2);
        assert!((r2.total - 2.1).abs() < 1e-12);
        assert!(LossWeights::new(1.0, -1.0, 0.0).is_err());
        assert!(LossWeights::new(1.0, f64::NAN, 0.0).is_err());
    }

    fn tiny_setup(seed: u64) -> (ModelParams, Batch) {
        let cfg = ModelConfig {
            image_size: 3,
            channels: 3,
            d_id: 3,
            hidden_sizes: vec![6, 5],
            group: GroupParams::new(6).unwrap(),
            seed,
            ..ModelConfig::default()
        };
        let params = ModelParams::init(cfg.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let d = cfg.pixels();
        let n = 2;
        let mut img = |rows| Array2::from_shape_simple_fn((rows, d), || rng.random_range(0.0..1.0));
        let full = PairBatch {
            images_i: img(n),
            images_j: img(n),
            theta_i: vec![0.0; n],
            theta_j: vec![0.0; n],
            steps: vec![1, 4],
            targets: Some(img(2 * n * 6)),
        };
        let extra = PairBatch {
            images_i: img(n),
            images_j: img(n),
            theta_i: vec![0.0; n],
            theta_j: vec![0.0; n],
            steps: vec![2, 5],
            targets: None,
        };
        (
            params,
            Batch {
                full,
                constraints_only: Some(extra),
            },
        )
    }

    #[test]
    fn gradients_match_finite_differences_on_tiny_model() {
        for seed in 0..3 {
            let (params, batch) = tiny_setup(seed);
            let w = LossWeights::STAGE2;
            let (_, grads) = backward(&params, &batch, w, PixelNorm::PerPixel).unwrap();
            let analytic: Vec<Vec<f64>> =
                grads.tensors().into_iter().map(|(_, g)| g.to_vec()).collect();
            let h = 1e-5;
            let mut probe = params.clone();
            for (t, grad) in analytic.iter().enumerate() {
                for i in 0..grad.len() {
                    let orig = probe.tensors_mut()[t][i];
                    probe.tensors_mut()[t][i] = orig + h;
                    let up = evaluate(&probe, &batch, w, PixelNorm::PerPixel).unwrap().total;
                    probe.tensors_mut()[t][i] = orig - h;
                    let down = evaluate(&probe, &batch, w, PixelNorm::PerPixel).unwrap().total;
                    probe.tensors_mut()[t][i] = orig;
                    let numeric = (up - down) / (2.0 * h);
                    let denom = grad[i].abs().max(numeric.abs()).max(1e-6);
                    assert!(
                        (grad[i] - numeric).abs() / denom < 1e-4,
                        "seed {seed} tensor {t} entry {i}: {} vs {numeric}",
                        grad[i]
                    );
                }
            }
        }
    }

    #[test]
    fn recon_gradient_scales_linearly_and_vanishes_at_perfect_fit() {
        let (params, mut batch) = tiny_setup(5);
        batch.constraints_only = None;
        let only_recon = LossWeights::new(7.0, 0.0, 0.0).unwrap();
        let doubled = LossWeights::new(14.0, 0.0, 0.0).unwrap();
        let (_, g1) = backward(&params, &batch, only_recon, PixelNorm::PerPixel).unwrap();
        let (_, g2) = backward(&params, &batch, doubled, PixelNorm::PerPixel).unwrap();
        for ((_, a), (_, b)) in g1.tensors().iter().zip(g2.tensors()) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(2.0 * x, *y);
            }
        }

        let p = params.generator();
        let enc = params
            .encode_traced(batch.full.stacked_inputs().view())
            .unwrap();
        let z = decoder_inputs(&enc.0.output, params.config().d_id, batch.full.len(), &p);
        batch.full.targets = Some(params.decode_batch(z.view()).unwrap());
        let (report, g) = backward(&params, &batch, only_recon, PixelNorm::PerPixel).unwrap();
        assert_eq!(report.recon, 0.0);
        for (_, t) in g.tensors() {
            assert!(t.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn missing_targets_rejected() {
        let (params, mut batch) = tiny_setup(1);
        batch.full.targets = None;
        assert!(evaluate(&params, &batch, LossWeights::STAGE1, PixelNorm::PerPixel).is_err());
    }

    proptest! {
        #[test]
        fn losses_nonnegative_and_pair_rotation_invariant(
            x1 in -1.0f64..1.0, y1 in -1.0f64..1.0,
            x2 in -1.0f64..1.0, y2 in -1.0f64..1.0,
            n in 0usize..36, k in -40i64..40,
        ) {
            let p = LatentGenerator::new(GroupParams::default());
            let a = [x1, y1];
            let b = [x2, y2];
            prop_assert!(radius_loss(a, 0.8) >= 0.0);
            let l = pair_loss(a, b, n, &p);
            prop_assert!(l >= 0.0);
            let rotated = pair_loss(p.apply_power(k, a), p.apply_power(k, b), n, &p);
            prop_assert!((l - rotated).abs() < 1e-9);
            let r = total_loss(0.3, radius_loss(a, 0.8), l, LossWeights::STAGE1);
            prop_assert!((r.total - (100.0 * 0.3 + r.radius + 3.0 * r.pair)).abs() < 1e-12);
        }
    }
}
