//! Procedural multi-view toy objects.
//!
//! Every object is a small cloud of coloured discs sharing one canonical
//! frame: an elongated body plus a red marker at azimuth 0° and a green
//! marker at azimuth 135°. The markers make every azimuth visually distinct,
//! and because all objects share the frame, a pose label means the same
//! thing across objects.
//!
//! Views are rendered orthographically after rotating by `R_z(θ)` and
//! tilting by the elevation. Projected coordinates are snapped to a `2^-30`
//! grid before rasterisation so that rotating the object first and rendering
//! afterwards gives the same pixels as rendering at the summed angle.

use std::f64::consts::TAU;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{make_generator_3d, GroupParams};

pub const CHANNELS: usize = 3;
const VIEW_HALF_EXTENT: f64 = 1.05;
const SNAP: f64 = (1u64 << 30) as f64;
const BLOB_MAGIC: &[u8; 5] = b"OPVW1";

pub const MARKER_AZIMUTHS_DEG: [f64; 2] = [0.0, 135.0];
const MARKER_COLORS: [[f64; 3]; 2] = [[1.0, 0.12, 0.1], [0.1, 0.9, 0.2]];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyPoint {
    pub position: [f64; 3],
    pub color: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyObject {
    pub body: Vec<ToyPoint>,
    /// Uniquely coloured points off the rotation axis.
    pub markers: Vec<ToyPoint>,
}

impl ToyObject {
    pub fn points(&self) -> impl Iterator<Item = &ToyPoint> {
        self.body.iter().chain(self.markers.iter())
    }

    /// Same object with every point rotated about the z-axis by `theta`.
    pub fn rotated(&self, theta: f64) -> Result<ToyObject> {
        let r = make_generator_3d(theta)?;
        let rot = |p: &ToyPoint| ToyPoint {
            position: r.apply(p.position),
            ..*p
        };
        Ok(ToyObject {
            body: self.body.iter().map(rot).collect(),
            markers: self.markers.iter().map(rot).collect(),
        })
    }

    /// Same geometry with perturbed colours.
    pub fn style_shifted(&self, seed: u64) -> ToyObject {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5757_1e5e_ed00_0001);
        let gains: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.6..1.4));
        let shift = |p: &ToyPoint, rng: &mut ChaCha8Rng, amount: f64| ToyPoint {
            color: std::array::from_fn(|c| {
                (p.color[c] * gains[c] + rng.random_range(-amount..amount)).clamp(0.0, 1.0)
            }),
            ..*p
        };
        ToyObject {
            body: self.body.iter().map(|p| shift(p, &mut rng, 0.15)).collect(),
            markers: self.markers.iter().map(|p| shift(p, &mut rng, 0.08)).collect(),
        }
    }

    /// Azimuth of each marker in radians, in `[0, 2π)`.
    pub fn marker_azimuths(&self) -> Vec<f64> {
        self.markers
            .iter()
            .map(|m| m.position[1].atan2(m.position[0]).rem_euclid(TAU))
            .collect()
    }
}

/// Deterministic object with `complexity` body points and two markers.
pub fn synthesize_object(seed: u64, complexity: usize) -> Result<ToyObject> {
    if complexity < 3 {
        return Err(Error::InvalidParam(format!(
            "object complexity must be at least 3, got {complexity}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let length = rng.random_range(0.7..0.85);
    let width = rng.random_range(0.38..0.5);
    let body = (0..complexity)
        .map(|_| {
            let phi = rng.random_range(0.0..TAU);
            let u = rng.random_range(0.3..1.0);
            let gray: f64 = rng.random_range(0.25..0.45);
            ToyPoint {
                position: [
                    length * u * phi.cos(),
                    width * u * phi.sin(),
                    rng.random_range(-0.35..0.2),
                ],
                color: std::array::from_fn(|_| {
                    (gray + rng.random_range(-0.08..0.08)).clamp(0.0, 1.0)
                }),
                radius: rng.random_range(0.09..0.16),
            }
        })
        .collect();
    let markers = MARKER_AZIMUTHS_DEG
        .iter()
        .zip(MARKER_COLORS)
        .enumerate()
        .map(|(i, (&az, color))| {
            let r = if i == 0 {
                rng.random_range(0.78..0.9)
            } else {
                rng.random_range(0.6..0.72)
            };
            let az = az.to_radians();
            ToyPoint {
                position: [r * az.cos(), r * az.sin(), rng.random_range(0.0..0.2)],
                color,
                radius: 0.16,
            }
        })
        .collect();
    Ok(ToyObject { body, markers })
}

fn snap(v: f64) -> f64 {
    (v * SNAP).round() / SNAP
}

/// Render one `size × size × 3` view, row-major HWC, values in `[0, 1]`.
///
/// Points are rotated by `R_z(theta)`, tilted about the x-axis by the
/// elevation, projected orthographically, and splatted far-to-near as
/// anti-aliased discs.
pub fn render(obj: &ToyObject, theta: f64, elevation: f64, size: usize) -> Result<Vec<f64>> {
    if size == 0 {
        return Err(Error::InvalidParam("image size must be positive".into()));
    }
    let rz = make_generator_3d(theta)?;
    let (se, ce) = elevation.sin_cos();
    // (u, v, depth, point); larger depth is farther from the camera.
    let mut projected: Vec<(f64, f64, f64, &ToyPoint)> = obj
        .points()
        .map(|p| {
            let [x, y, z] = rz.apply(p.position);
            (snap(x), snap(y * se + z * ce), snap(y * ce - z * se), p)
        })
        .collect();
    // Stable sort keeps generation order on depth ties.
    projected.sort_by(|a, b| b.2.total_cmp(&a.2));

    let pixel = 2.0 * VIEW_HALF_EXTENT / size as f64;
    let mut img = vec![0.0; size * size * CHANNELS];
    for (u, v, _, point) in projected {
        let reach = point.radius + pixel;
        let col_lo = (((u - reach + VIEW_HALF_EXTENT) / pixel).floor().max(0.0)) as usize;
        let col_hi = (((u + reach + VIEW_HALF_EXTENT) / pixel).ceil() as usize).min(size);
        let row_lo = (((VIEW_HALF_EXTENT - v - reach) / pixel).floor().max(0.0)) as usize;
        let row_hi = (((VIEW_HALF_EXTENT - v + reach) / pixel).ceil() as usize).min(size);
        for row in row_lo..row_hi {
            let pv = VIEW_HALF_EXTENT - (row as f64 + 0.5) * pixel;
            for col in col_lo..col_hi {
                let pu = -VIEW_HALF_EXTENT + (col as f64 + 0.5) * pixel;
                let dist = (pu - u).hypot(pv - v);
                let alpha = ((point.radius - dist) / pixel + 0.5).clamp(0.0, 1.0);
                if alpha > 0.0 {
                    let base = (row * size + col) * CHANNELS;
                    for ch in 0..CHANNELS {
                        let dst = &mut img[base + ch];
                        *dst = alpha * point.color[ch] + (1.0 - alpha) * *dst;
                    }
                }
            }
        }
    }
    Ok(img)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    HeldOut,
    /// Same kind of geometry, perturbed colours; only used for latent
    /// constraints during the second training stage.
    StyleShifted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub n_objects: usize,
    pub group: GroupParams,
    pub elevations_deg: Vec<f64>,
    pub image_size: usize,
    pub complexity: usize,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            n_objects: 40,
            group: GroupParams::default(),
            elevations_deg: vec![20.0],
            image_size: 32,
            complexity: 12,
            seed: 0,
        }
    }
}

/// All views of one object: `elevations × K` images in pose order.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectViews {
    pub object_id: usize,
    pub split: Split,
    pub seed: u64,
    group: GroupParams,
    elevations: Vec<f64>,
    image_size: usize,
    pixels: Vec<f32>,
}

/// One labelled view borrowed from a dataset.
#[derive(Debug, Clone, Copy)]
pub struct ToyView<'a> {
    pub image: &'a [f32],
    pub theta: f64,
    pub pose_index: usize,
    pub elevation: f64,
    pub object_id: usize,
    pub split: Split,
}

impl ToyView<'_> {
    pub fn image_f64(&self) -> Vec<f64> {
        self.image.iter().map(|&v| v as f64).collect()
    }
}

impl ObjectViews {
    pub fn image_len(&self) -> usize {
        self.image_size * self.image_size * CHANNELS
    }

    pub fn n_elevations(&self) -> usize {
        self.elevations.len()
    }

    pub fn n_poses(&self) -> usize {
        self.group.order()
    }

    /// True when every (elevation, pose) image is present.
    pub fn is_complete(&self) -> bool {
        self.pixels.len() == self.n_elevations() * self.n_poses() * self.image_len()
    }

    pub fn image(&self, elevation: usize, pose: usize) -> &[f32] {
        let len = self.image_len();
        let start = (elevation * self.n_poses() + pose % self.n_poses()) * len;
        &self.pixels[start..start + len]
    }

    pub fn view(&self, elevation: usize, pose: usize) -> ToyView<'_> {
        let pose = pose % self.n_poses();
        ToyView {
            image: self.image(elevation, pose),
            theta: self.group.angle_of(pose as i64),
            pose_index: pose,
            elevation: self.elevations[elevation],
            object_id: self.object_id,
            split: self.split,
        }
    }

    /// No two poses at the same elevation render to the same image.
    pub fn has_distinct_poses(&self) -> bool {
        (0..self.n_elevations()).all(|e| {
            (0..self.n_poses()).all(|a| {
                (a + 1..self.n_poses()).all(|b| self.image(e, a) != self.image(e, b))
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: usize,
    pub split: Split,
    pub seed: u64,
    pub file: String,
}

/// JSON manifest stored next to the per-object blobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub group_order: usize,
    pub delta_theta: f64,
    pub image_size: usize,
    pub channels: usize,
    pub elevations_deg: Vec<f64>,
    pub complexity: usize,
    pub seed: u64,
    pub objects: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub objects: Vec<ObjectViews>,
}

fn split_sizes(n: usize) -> (usize, usize) {
    let tenth = (n as f64 / 10.0).round() as usize;
    let held = tenth.max(1);
    let style = tenth.min(n.saturating_sub(held + 1));
    (held, style)
}

/// Render every object at every pose and elevation, splitting objects
/// 80/10/10 into train / held-out / style-shifted.
pub fn build_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    if spec.n_objects < 2 {
        return Err(Error::InvalidParam("a dataset needs at least 2 objects".into()));
    }
    if spec.elevations_deg.is_empty() {
        return Err(Error::InvalidParam("at least one elevation is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let seeds: Vec<u64> = (0..spec.n_objects).map(|_| rng.random()).collect();
    let mut order: Vec<usize> = (0..spec.n_objects).collect();
    order.shuffle(&mut rng);
    let (n_held, n_style) = split_sizes(spec.n_objects);
    let mut splits = vec![Split::Train; spec.n_objects];
    for &i in &order[..n_held] {
        splits[i] = Split::HeldOut;
    }
    for &i in &order[n_held..n_held + n_style] {
        splits[i] = Split::StyleShifted;
    }

    let elevations: Vec<f64> = spec.elevations_deg.iter().map(|d| d.to_radians()).collect();
    let objects = (0..spec.n_objects)
        .map(|id| {
            let mut obj = synthesize_object(seeds[id], spec.complexity)?;
            if splits[id] == Split::StyleShifted {
                obj = obj.style_shifted(seeds[id]);
            }
            let mut pixels = Vec::new();
            for &e in &elevations {
                for k in 0..spec.group.order() {
                    let img = render(&obj, spec.group.angle_of(k as i64), e, spec.image_size)?;
                    pixels.extend(img.iter().map(|&v| v as f32));
                }
            }
            Ok(ObjectViews {
                object_id: id,
                split: splits[id],
                seed: seeds[id],
                group: spec.group,
                elevations: elevations.clone(),
                image_size: spec.image_size,
                pixels,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        spec: spec.clone(),
        objects,
    })
}

impl Dataset {
    pub fn group(&self) -> GroupParams {
        self.spec.group
    }

    pub fn image_len(&self) -> usize {
        self.spec.image_size * self.spec.image_size * CHANNELS
    }

    pub fn split(&self, split: Split) -> Vec<&ObjectViews> {
        self.objects.iter().filter(|o| o.split == split).collect()
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            format: "OPVW1".into(),
            group_order: self.spec.group.order(),
            delta_theta: self.spec.group.delta_theta(),
            image_size: self.spec.image_size,
            channels: CHANNELS,
            elevations_deg: self.spec.elevations_deg.clone(),
            complexity: self.spec.complexity,
            seed: self.spec.seed,
            objects: self
                .objects
                .iter()
                .map(|o| ManifestEntry {
                    id: o.object_id,
                    split: o.split,
                    seed: o.seed,
                    file: blob_name(o.object_id),
                })
                .collect(),
        }
    }

    /// Write `manifest.json` plus one `OPVW1` blob per object into `dir`.
    ///
    /// Blob layout: magic `OPVW1`, then elevations, K, H, W, C as u64
    /// little-endian, then the pixels as f32 little-endian in
    /// elevation-major, pose order.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for obj in &self.objects {
            let path = dir.join(blob_name(obj.object_id));
            let mut buf = Vec::with_capacity(45 + obj.pixels.len() * 4);
            buf.extend_from_slice(BLOB_MAGIC);
            for d in [
                obj.n_elevations(),
                obj.n_poses(),
                obj.image_size,
                obj.image_size,
                CHANNELS,
            ] {
                buf.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for v in &obj.pixels {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
        }
        let path = dir.join("manifest.json");
        let mut file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let json = serde_json::to_string_pretty(&self.manifest())
            .map_err(|e| Error::format("manifest", e.to_string()))?;
        file.write_all(json.as_bytes())
            .and_then(|_| file.write_all(b"\n"))
            .map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Dataset> {
        let dir = dir.as_ref();
        let path = dir.join("manifest.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::format("manifest", e.to_string()))?;
        if manifest.format != "OPVW1" || manifest.channels != CHANNELS {
            return Err(Error::format("manifest", "unsupported format or channel count"));
        }
        let group = GroupParams::new(manifest.group_order)?;
        let spec = DatasetSpec {
            n_objects: manifest.objects.len(),
            group,
            elevations_deg: manifest.elevations_deg.clone(),
            image_size: manifest.image_size,
            complexity: manifest.complexity,
            seed: manifest.seed,
        };
        let expected_dims = [
            spec.elevations_deg.len(),
            group.order(),
            spec.image_size,
            spec.image_size,
            CHANNELS,
        ];
        let objects = manifest
            .objects
            .iter()
            .map(|entry| {
                let path = dir.join(&entry.file);
                let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
                let pixels = parse_blob(&bytes, &expected_dims)?;
                Ok(ObjectViews {
                    object_id: entry.id,
                    split: entry.split,
                    seed: entry.seed,
                    group,
                    elevations: spec.elevations_deg.iter().map(|d| d.to_radians()).collect(),
                    image_size: spec.image_size,
                    pixels,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset { spec, objects })
    }
}

fn blob_name(id: usize) -> String {
    format!("object_{id:04}.bin")
}

fn parse_blob(bytes: &[u8], expected_dims: &[usize; 5]) -> Result<Vec<f32>> {
    let bad = |detail: &str| Error::format("view blob", detail);
    let header = BLOB_MAGIC.len() + 5 * 8;
    if bytes.len() < header || &bytes[..BLOB_MAGIC.len()] != BLOB_MAGIC {
        return Err(bad("missing OPVW1 header"));
    }
    for (i, &want) in expected_dims.iter().enumerate() {
        let at = BLOB_MAGIC.len() + i * 8;
        let got = u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
        if got as usize != want {
            return Err(bad("dims disagree with the manifest"));
        }
    }
    let body = &bytes[header..];
    let count: usize = expected_dims.iter().product();
    if body.len() != count * 4 {
        return Err(bad("pixel payload has the wrong length"));
    }
    Ok(body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect())
}
