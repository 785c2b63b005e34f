//! The orbit generator: encoder/decoder pair with an identity/pose split of
//! the latent code, plus latent orbit construction.
//!
//! The encoder maps a flattened `H×W×C` image to `d_id + 2` units. The first
//! `d_id` units (ReLU) form the identity vector `f_id`; the last two (tanh)
//! form the pose vector `f_pose`. Rotating the object by one group step
//! should rotate `f_pose` by the latent generator while leaving `f_id`
//! unchanged, so the identity block of the latent representation is never
//! materialised: the code is sliced and only `f_pose` is rotated.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{GroupParams, LatentGenerator};
use crate::nn::{DenseGrad, Mlp, OutputActivation, Trace};

pub const POSE_DIM: usize = 2;

const CHECKPOINT_MAGIC: &[u8; 6] = b"OPOSE1";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub image_size: usize,
    pub channels: usize,
    pub d_id: usize,
    /// Encoder hidden widths; the decoder uses them in reverse.
    pub hidden_sizes: Vec<usize>,
    /// Target orbit radius.
    pub c: f64,
    pub group: GroupParams,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            image_size: 32,
            channels: 3,
            d_id: 32,
            hidden_sizes: vec![256, 128],
            c: 0.8,
            group: GroupParams::default(),
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        if self.image_size == 0 || self.channels == 0 {
            return bad("image size and channel count must be positive".into());
        }
        if self.d_id == 0 {
            return bad("identity width d_id must be at least 1".into());
        }
        if self.hidden_sizes.is_empty() || self.hidden_sizes.contains(&0) {
            return bad(format!("bad hidden sizes {:?}", self.hidden_sizes));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return bad(format!("orbit radius c must lie in (0, 1), got {}", self.c));
        }
        Ok(())
    }

    /// Flattened pixel count `H·W·C`.
    pub fn pixels(&self) -> usize {
        self.image_size * self.image_size * self.channels
    }

    pub fn code_width(&self) -> usize {
        self.d_id + POSE_DIM
    }

    fn encoder_widths(&self) -> Vec<usize> {
        let mut w = vec![self.pixels()];
        w.extend(&self.hidden_sizes);
        w.push(self.code_width());
        w
    }

    fn decoder_widths(&self) -> Vec<usize> {
        let mut w = self.encoder_widths();
        w.reverse();
        w
    }
}

/// Disentangled encoder output.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentCode {
    pub f_id: Vec<f64>,
    pub f_pose: [f64; 2],
}

impl LatentCode {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.f_id.clone();
        v.extend_from_slice(&self.f_pose);
        v
    }

    /// Split a raw code row into identity and pose parts.
    pub fn from_slice(row: &[f64], d_id: usize) -> Result<Self> {
        if row.len() != d_id + POSE_DIM {
            return Err(Error::DimensionMismatch {
                context: "latent code",
                expected: d_id + POSE_DIM,
                actual: row.len(),
            });
        }
        Ok(Self {
            f_id: row[..d_id].to_vec(),
            f_pose: [row[d_id], row[d_id + 1]],
        })
    }
}

/// Exchange the pose parts of two codes.
pub fn swap_pose_units(a: &LatentCode, b: &LatentCode) -> (LatentCode, LatentCode) {
    (
        LatentCode {
            f_id: a.f_id.clone(),
            f_pose: b.f_pose,
        },
        LatentCode {
            f_id: b.f_id.clone(),
            f_pose: a.f_pose,
        },
    )
}

/// An ordered set of K latent pose points; element k is the pose after k
/// generator steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    points: Vec<[f64; 2]>,
}

impl Orbit {
    pub fn generate(f_pose: [f64; 2], p: &LatentGenerator) -> Self {
        let points = (0..p.group().order())
            .map(|k| p.apply_power(k as i64, f_pose))
            .collect();
        Self { points }
    }

    /// Wrap arbitrary points, e.g. a noisy or externally produced orbit.
    pub fn from_points(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParam(format!(
                "an orbit needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam("orbit points must be finite".into()));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn get(&self, k: usize) -> [f64; 2] {
        self.points[k % self.points.len()]
    }

    /// Root-mean-square distance of the points from the origin.
    pub fn rms_norm(&self) -> f64 {
        let s: f64 = self.points.iter().map(|p| p[0] * p[0] + p[1] * p[1]).sum();
        (s / self.points.len() as f64).sqrt()
    }

    /// Cyclic shift: element k of the result is element `k + steps` of self.
    pub fn advanced(&self, steps: i64) -> Self {
        let n = self.points.len() as i64;
        let points = (0..n)
            .map(|k| self.points[(k + steps).rem_euclid(n) as usize])
            .collect();
        Self { points }
    }
}

pub fn generate_orbit(f_pose: [f64; 2], group: GroupParams) -> Orbit {
    Orbit::generate(f_pose, &LatentGenerator::new(group))
}

/// `f_id ⊕ orbit[k]` for every k, in orbit order.
pub fn assemble_decoder_inputs(f_id: &[f64], orbit: &Orbit) -> Vec<LatentCode> {
    orbit
        .points()
        .iter()
        .map(|&f_pose| LatentCode {
            f_id: f_id.to_vec(),
            f_pose,
        })
        .collect()
}

/// All trainable weights of the encoder and decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    config: ModelConfig,
    pub(crate) encoder: Mlp,
    pub(crate) decoder: Mlp,
}

/// Gradient of a scalar objective with respect to every parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub(crate) encoder: Vec<DenseGrad>,
    pub(crate) decoder: Vec<DenseGrad>,
}

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Self {
            encoder: params.encoder.layers.iter().map(DenseGrad::zeros_like).collect(),
            decoder: params.decoder.layers.iter().map(DenseGrad::zeros_like).collect(),
        }
    }

    /// `(name, values)` for every tensor, in the same order as
    /// [`ModelParams::tensors`].
    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::new();
        for (net, grads) in [("encoder", &self.encoder), ("decoder", &self.decoder)] {
            for (l, g) in grads.iter().enumerate() {
                out.push((format!("{net}.{l}.weight"), g.w.as_slice().expect("standard layout")));
                out.push((format!("{net}.{l}.bias"), g.b.as_slice().expect("standard layout")));
            }
        }
        out
    }

    /// Fails naming the first tensor holding a NaN or infinity.
    pub fn check_finite(&self) -> Result<()> {
        for (name, values) in self.tensors() {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient { tensor: name });
            }
        }
        Ok(())
    }
}

pub(crate) struct EncoderTrace(pub Trace);
pub(crate) struct DecoderTrace(pub Trace);

impl ModelParams {
    /// Uniform `[-s, s]` initialisation with `s = 1/sqrt(fan_in)`, seeded from
    /// the config.
    pub fn init(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let encoder = Mlp::init(
            &config.encoder_widths(),
            OutputActivation::ReluThenTanh {
                relu_units: config.d_id,
            },
            &mut rng,
        );
        let decoder = Mlp::init(&config.decoder_widths(), OutputActivation::Sigmoid, &mut rng);
        Ok(Self {
            config,
            encoder,
            decoder,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn generator(&self) -> LatentGenerator {
        LatentGenerator::new(self.config.group)
    }

    pub fn encode(&self, image: &[f64]) -> Result<LatentCode> {
        let x = ArrayView2::from_shape((1, image.len()), image).expect("row view");
        let codes = self.encode_batch(x)?;
        LatentCode::from_slice(codes.row(0).as_slice().expect("contiguous row"), self.config.d_id)
    }

    /// Encode each row of `images`; returns one raw code row per image.
    pub fn encode_batch(&self, images: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_width("encoder input", images.ncols(), self.config.pixels())?;
        Ok(self.encoder.forward(images))
    }

    pub fn decode(&self, code: &LatentCode) -> Result<Vec<f64>> {
        let row = code.to_vec();
        let z = ArrayView2::from_shape((1, row.len()), &row).expect("row view");
        let out = self.decode_batch(z)?;
        Ok(out.into_raw_vec_and_offset().0)
    }

    pub fn decode_batch(&self, codes: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_width("decoder input", codes.ncols(), self.config.code_width())?;
        Ok(self.decoder.forward(codes))
    }

    /// Pose-only encoding, the orbit generator used after training.
    pub fn orbit_of(&self, image: &[f64]) -> Result<Orbit> {
        let code = self.encode(image)?;
        Ok(Orbit::generate(code.f_pose, &self.generator()))
    }

    pub(crate) fn encode_traced(&self, images: ArrayView2<f64>) -> Result<EncoderTrace> {
        self.check_width("encoder input", images.ncols(), self.config.pixels())?;
        Ok(EncoderTrace(self.encoder.forward_traced(images)))
    }

    pub(crate) fn encoder_activation(&self) -> OutputActivation {
        self.encoder.output
    }

    pub(crate) fn decoder_activation(&self) -> OutputActivation {
        self.decoder.output
    }

    pub(crate) fn decode_traced(&self, codes: ArrayView2<f64>) -> Result<DecoderTrace> {
        self.check_width("decoder input", codes.ncols(), self.config.code_width())?;
        Ok(DecoderTrace(self.decoder.forward_traced(codes)))
    }

    fn check_width(&self, context: &'static str, actual: usize, expected: usize) -> Result<()> {
        if actual != expected {
            return Err(Error::DimensionMismatch {
                context,
                expected,
                actual,
            });
        }
        Ok(())
    }

    /// `(name, values)` for every tensor: encoder layers then decoder layers,
    /// weight before bias.
    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::new();
        for (net, mlp) in [("encoder", &self.encoder), ("decoder", &self.decoder)] {
            for (l, layer) in mlp.layers.iter().enumerate() {
                out.push((format!("{net}.{l}.weight"), layer.w.as_slice().expect("standard layout")));
                out.push((format!("{net}.{l}.bias"), layer.b.as_slice().expect("standard layout")));
            }
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for mlp in [&mut self.encoder, &mut self.decoder] {
            for layer in mlp.layers.iter_mut() {
                out.push(layer.w.as_slice_mut().expect("standard layout"));
                out.push(layer.b.as_slice_mut().expect("standard layout"));
            }
        }
        out
    }

    fn tensor_shapes(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for mlp in [&self.encoder, &self.decoder] {
            for layer in &mlp.layers {
                out.push(layer.w.shape().to_vec());
                out.push(layer.b.shape().to_vec());
            }
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Serialise to the `OPOSE1` checkpoint layout.
    ///
    /// Layout, all integers u64 little-endian:
    /// magic `OPOSE1`; image_size, channels, d_id, group order, seed,
    /// bits of `c` as f64, hidden layer count, each hidden width; tensor
    /// count; then per tensor its rank, its dims, and its values as
    /// row-major f64 little-endian.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let c = &self.config;
        w.write_all(CHECKPOINT_MAGIC)?;
        let mut header = vec![
            c.image_size as u64,
            c.channels as u64,
            c.d_id as u64,
            c.group.order() as u64,
            c.seed,
            c.c.to_bits(),
            c.hidden_sizes.len() as u64,
        ];
        header.extend(c.hidden_sizes.iter().map(|&h| h as u64));
        for v in header {
            w.write_all(&v.to_le_bytes())?;
        }
        let shapes = self.tensor_shapes();
        w.write_all(&(shapes.len() as u64).to_le_bytes())?;
        for (shape, (_, values)) in shapes.iter().zip(self.tensors()) {
            w.write_all(&(shape.len() as u64).to_le_bytes())?;
            for &d in shape {
                w.write_all(&(d as u64).to_le_bytes())?;
            }
            for v in values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let bad = |detail: &str| Error::format("checkpoint", detail);
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic).map_err(|_| bad("truncated magic"))?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(bad("wrong magic, expected OPOSE1"));
        }
        let mut next = || -> Result<u64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b).map_err(|_| bad("truncated"))?;
            Ok(u64::from_le_bytes(b))
        };
        let image_size = next()? as usize;
        let channels = next()? as usize;
        let d_id = next()? as usize;
        let order = next()? as usize;
        let seed = next()?;
        let c = f64::from_bits(next()?);
        let n_hidden = next()? as usize;
        if n_hidden > 64 {
            return Err(bad("implausible hidden layer count"));
        }
        let hidden_sizes = (0..n_hidden)
            .map(|_| next().map(|v| v as usize))
            .collect::<Result<Vec<_>>>()?;
        let config = ModelConfig {
            image_size,
            channels,
            d_id,
            hidden_sizes,
            c,
            group: GroupParams::new(order)?,
            seed,
        };
        config.validate()?;

        let mut params = Self::init(config)?;
        let expected_shapes = params.tensor_shapes();
        if next()? as usize != expected_shapes.len() {
            return Err(bad("tensor count does not match the configuration"));
        }
        for (shape, dst) in expected_shapes.iter().zip(params.tensors_mut()) {
            let rank = next()? as usize;
            if rank != shape.len() {
                return Err(bad("tensor rank does not match the configuration"));
            }
            for &d in shape {
                if next()? as usize != d {
                    return Err(bad("tensor dims do not match the configuration"));
                }
            }
            for v in dst.iter_mut() {
                *v = f64::from_bits(next()?);
                if !v.is_finite() {
                    return Err(bad("non-finite weight"));
                }
            }
        }
        Ok(params)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_config() -> ModelConfig {
        ModelConfig {
            image_size: 4,
            channels: 3,
            d_id: 5,
            hidden_sizes: vec![16, 8],
            seed: 11,
            ..ModelConfig::default()
        }
    }

    fn image(config: &ModelConfig, phase: f64) -> Vec<f64> {
        (0..config.pixels())
            .map(|i| 0.5 + 0.5 * ((i as f64) * 0.37 + phase).sin())
            .collect()
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::default().validate().is_ok());
        for bad in [
            ModelConfig { d_id: 0, ..ModelConfig::default() },
            ModelConfig { c: 1.0, ..ModelConfig::default() },
            ModelConfig { c: 0.0, ..ModelConfig::default() },
            ModelConfig { hidden_sizes: vec![], ..ModelConfig::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn encode_shape_and_range() {
        let cfg = small_config();
        let params = ModelParams::init(cfg.clone()).unwrap();
        for phase in [0.0, 1.0, 2.5] {
            let code = params.encode(&image(&cfg, phase)).unwrap();
            assert_eq!(code.f_id.len(), cfg.d_id);
            assert!(code.f_pose.iter().all(|v| v.abs() < 1.0));
            assert!(code.f_id.iter().all(|v| *v >= 0.0 && v.is_finite()));
        }
        assert!(matches!(
            params.encode(&[0.0; 7]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn decode_shape_range_and_determinism() {
        let cfg = small_config();
        let params = ModelParams::init(cfg.clone()).unwrap();
        let zero = LatentCode {
            f_id: vec![0.0; cfg.d_id],
            f_pose: [0.0, 0.0],
        };
        let a = params.decode(&zero).unwrap();
        let b = params.decode(&zero).unwrap();
        assert_eq!(a.len(), cfg.pixels());
        assert_eq!(a, b);
        assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
        let wrong = LatentCode {
            f_id: vec![0.0; 2],
            f_pose: [0.0, 0.0],
        };
        assert!(params.decode(&wrong).is_err());
    }

    #[test]
    fn encode_decode_bit_identical_across_calls() {
        let cfg = small_config();
        let params = ModelParams::init(cfg.clone()).unwrap();
        let img = image(&cfg, 0.3);
        let r1 = params.decode(&params.encode(&img).unwrap()).unwrap();
        let r2 = params.decode(&params.encode(&img).unwrap()).unwrap();
        assert_eq!(
            r1.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            r2.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn batch_and_single_encoding_agree() {
        let cfg = small_config();
        let params = ModelParams::init(cfg.clone()).unwrap();
        let imgs: Vec<Vec<f64>> = (0..3).map(|i| image(&cfg, i as f64)).collect();
        let flat: Vec<f64> = imgs.concat();
        let batch = Array2::from_shape_vec((3, cfg.pixels()), flat).unwrap();
        let codes = params.encode_batch(batch.view()).unwrap();
        for (i, img) in imgs.iter().enumerate() {
            let single = params.encode(img).unwrap().to_vec();
            for (a, b) in single.iter().zip(codes.row(i)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn orbit_examples() {
        let g = GroupParams::default();
        let orbit = generate_orbit([0.8, 0.0], g);
        assert_eq!(orbit.len(), 36);
        assert_eq!(orbit.get(0), [0.8, 0.0]);
        let q = orbit.get(9);
        assert!(q[0].abs() < 1e-9 && (q[1] - 0.8).abs() < 1e-9);
        for p in orbit.points() {
            assert!((p[0].hypot(p[1]) - 0.8).abs() < 1e-9);
        }
    }

    #[test]
    fn swap_examples() {
        let a = LatentCode { f_id: vec![1.0, 2.0], f_pose: [0.1, 0.2] };
        let b = LatentCode { f_id: vec![3.0, 4.0], f_pose: [0.3, 0.4] };
        let (sa, sb) = swap_pose_units(&a, &b);
        assert_eq!(sa, LatentCode { f_id: vec![1.0, 2.0], f_pose: [0.3, 0.4] });
        assert_eq!(sb, LatentCode { f_id: vec![3.0, 4.0], f_pose: [0.1, 0.2] });
        let (ra, rb) = swap_pose_units(&sa, &sb);
        assert_eq!((ra, rb), (a.clone(), b));
        assert_eq!(swap_pose_units(&a, &a), (a.clone(), a));
    }

    #[test]
    fn decoder_inputs_copy_identity() {
        let orbit = generate_orbit([0.5, 0.1], GroupParams::default());
        let f_id = vec![0.25, 0.5, 0.75];
        let codes = assemble_decoder_inputs(&f_id, &orbit);
        assert_eq!(codes.len(), 36);
        assert_eq!(codes[0].f_pose, orbit.get(0));
        for (k, code) in codes.iter().enumerate() {
            assert_eq!(code.f_id, f_id);
            assert_eq!(code.f_pose, orbit.get(k));
        }
    }

    #[test]
    fn checkpoint_round_trip_and_rejections() {
        let params = ModelParams::init(small_config()).unwrap();
        let bytes = params.to_bytes();
        assert_eq!(&bytes[..6], b"OPOSE1");
        let back = ModelParams::from_bytes(&bytes).unwrap();
        assert_eq!(back, params);

        let mut wrong_magic = bytes.clone();
        wrong_magic[0] = b'X';
        assert!(ModelParams::from_bytes(&wrong_magic).is_err());
        assert!(ModelParams::from_bytes(&bytes[..bytes.len() - 3]).is_err());
    }

    #[test]
    fn non_finite_gradient_is_named() {
        let params = ModelParams::init(small_config()).unwrap();
        let mut g = Gradients::zeros_like(&params);
        assert!(g.check_finite().is_ok());
        g.decoder[1].b[0] = f64::NAN;
        match g.check_finite() {
            Err(Error::NonFiniteGradient { tensor }) => assert_eq!(tensor, "decoder.1.bias"),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn orbit_closure_and_shift_equivariance(x in -0.99f64..0.99, y in -0.99f64..0.99) {
            let g = GroupParams::default();
            let p = LatentGenerator::new(g);
            let orbit = generate_orbit([x, y], g);
            let wrapped = p.apply_power(1, orbit.get(35));
            prop_assert!((wrapped[0] - x).abs() < 1e-9 && (wrapped[1] - y).abs() < 1e-9);

            let stepped = generate_orbit(p.apply_power(1, [x, y]), g);
            let shifted = orbit.advanced(1);
            for (a, b) in stepped.points().iter().zip(shifted.points()) {
                prop_assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
            }
            for k in 0..36 {
                let next = p.apply_power(1, orbit.get(k));
                let want = orbit.get((k + 1) % 36);
                prop_assert!((next[0] - want[0]).abs() < 1e-9 && (next[1] - want[1]).abs() < 1e-9);
            }
        }

        #[test]
        fn swap_is_involution(a in proptest::collection::vec(-5.0f64..5.0, 5),
                              b in proptest::collection::vec(-5.0f64..5.0, 5)) {
            let ca = LatentCode::from_slice(&a, 3).unwrap();
            let cb = LatentCode::from_slice(&b, 3).unwrap();
            let (sa, sb) = swap_pose_units(&ca, &cb);
            prop_assert_eq!(&sa.f_id, &ca.f_id);
            prop_assert_eq!(sa.f_pose, cb.f_pose);
            prop_assert_eq!(swap_pose_units(&sa, &sb), (ca, cb));
        }
    }
}
