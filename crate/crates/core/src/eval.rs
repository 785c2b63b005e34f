//! Absolute-pose evaluation by gauging against a labelled reference view,
//! error-mode breakdown, and orbit export for plotting.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupParams, LatentGenerator};
use crate::metric::{estimate_shift_directed, gauge_absolute_pose, write_orbit_csv};
use crate::model::{ModelParams, Orbit};
use crate::toydata::{Dataset, Split, ToyView};

/// Smallest angle between two azimuths, in degrees within `[0, 180]`.
pub fn angular_error(theta_pred: f64, theta_gt: f64) -> f64 {
    let d = (theta_pred - theta_gt).to_degrees().rem_euclid(360.0);
    d.min(360.0 - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    /// err < 15°
    Exact,
    /// 15° ≤ err ≤ 30°
    Nearby,
    /// 30° < err ≤ 165°
    Others,
    /// err > 165°
    Opposite,
}

pub fn classify_error_mode(err_deg: f64) -> ErrorMode {
    if err_deg < 15.0 {
        ErrorMode::Exact
    } else if err_deg <= 30.0 {
        ErrorMode::Nearby
    } else if err_deg <= 165.0 {
        ErrorMode::Others
    } else {
        ErrorMode::Opposite
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ErrorModeCounts {
    pub exact: usize,
    pub nearby: usize,
    pub others: usize,
    pub opposite: usize,
}

impl ErrorModeCounts {
    pub fn add(&mut self, mode: ErrorMode) {
        match mode {
            ErrorMode::Exact => self.exact += 1,
            ErrorMode::Nearby => self.nearby += 1,
            ErrorMode::Others => self.others += 1,
            ErrorMode::Opposite => self.opposite += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.exact + self.nearby + self.others + self.opposite
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub object_id: usize,
    /// Radians.
    pub theta_gt: f64,
    /// Radians.
    pub theta_pred: f64,
    pub err_deg: f64,
}

impl PoseRecord {
    pub fn new(object_id: usize, theta_gt: f64, theta_pred: f64) -> Self {
        Self {
            object_id,
            theta_gt,
            theta_pred,
            err_deg: angular_error(theta_pred, theta_gt),
        }
    }
}

/// Nearest of the K bins, bin k covering `[(k − ½)Δθ, (k + ½)Δθ)`.
pub fn pose_bin(theta: f64, group: GroupParams) -> usize {
    let steps = (theta.rem_euclid(TAU) / group.delta_theta()).round() as usize;
    steps % group.order()
}

/// Fraction of records whose predicted bin matches the ground-truth bin.
pub fn accuracy_k(records: &[PoseRecord], group: GroupParams) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyInput("evaluation records"));
    }
    let hits = records
        .iter()
        .filter(|r| pose_bin(r.theta_pred, group) == pose_bin(r.theta_gt, group))
        .count();
    Ok(hits as f64 / records.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub group_order: usize,
    pub accuracy_k: f64,
    pub error_mode_counts: ErrorModeCounts,
    pub records: Vec<PoseRecord>,
    /// `confusion[gt_bin][pred_bin]`
    pub confusion: Vec<Vec<usize>>,
}

impl EvalReport {
    pub fn from_records(records: Vec<PoseRecord>, group: GroupParams) -> Result<Self> {
        let accuracy = accuracy_k(&records, group)?;
        let k = group.order();
        let mut counts = ErrorModeCounts::default();
        let mut confusion = vec![vec![0; k]; k];
        for r in &records {
            counts.add(classify_error_mode(r.err_deg));
            confusion[pose_bin(r.theta_gt, group)][pose_bin(r.theta_pred, group)] += 1;
        }
        Ok(Self {
            group_order: k,
            accuracy_k: accuracy,
            error_mode_counts: counts,
            records,
            confusion,
        })
    }

    pub fn fraction(&self, mode: ErrorMode) -> f64 {
        let c = &self.error_mode_counts;
        let n = match mode {
            ErrorMode::Exact => c.exact,
            ErrorMode::Nearby => c.nearby,
            ErrorMode::Others => c.others,
            ErrorMode::Opposite => c.opposite,
        };
        n as f64 / self.records.len() as f64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Header `gt\pred,0,…,K−1`, one row per ground-truth bin.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("gt\\pred");
        for k in 0..self.group_order {
            write!(out, ",{k}").expect("writing to a String");
        }
        out.push('\n');
        for (gt, row) in self.confusion.iter().enumerate() {
            write!(out, "{gt}").expect("writing to a String");
            for v in row {
                write!(out, ",{v}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }
}

/// Anything that can turn a labelled view into a latent orbit.
pub trait OrbitSource {
    fn orbit_of_view(&self, view: &ToyView<'_>) -> Result<Orbit>;
    fn group(&self) -> GroupParams;
    /// Fails when the source cannot consume this dataset's views.
    fn check_dataset(&self, dataset: &Dataset) -> Result<()>;
}

impl OrbitSource for ModelParams {
    fn orbit_of_view(&self, view: &ToyView<'_>) -> Result<Orbit> {
        self.orbit_of(&view.image_f64())
    }

    fn group(&self) -> GroupParams {
        self.config().group
    }

    fn check_dataset(&self, dataset: &Dataset) -> Result<()> {
        if dataset.image_len() != self.config().pixels() || dataset.group() != self.config().group {
            return Err(Error::Dataset(
                "checkpoint and dataset disagree on image size or group order".into(),
            ));
        }
        Ok(())
    }
}

/// Orbits built directly from ground-truth labels, `c·(cos θ, sin θ)`,
/// bypassing any encoder.
#[derive(Debug, Clone, Copy)]
pub struct OracleOrbits {
    pub c: f64,
    pub group: GroupParams,
}

impl OrbitSource for OracleOrbits {
    fn orbit_of_view(&self, view: &ToyView<'_>) -> Result<Orbit> {
        let p = LatentGenerator::new(self.group);
        Ok(Orbit::generate(
            [self.c * view.theta.cos(), self.c * view.theta.sin()],
            &p,
        ))
    }

    fn group(&self) -> GroupParams {
        self.group
    }

    fn check_dataset(&self, dataset: &Dataset) -> Result<()> {
        if dataset.group() != self.group {
            return Err(Error::Dataset("group order differs from the dataset".into()));
        }
        Ok(())
    }
}

/// Which labelled training view serves as the gauge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferencePolicy {
    /// One seeded reference view for the whole run.
    Single { seed: u64 },
    /// A fresh seeded reference view for each evaluated object.
    PerObject { seed: u64 },
}

impl Default for ReferencePolicy {
    fn default() -> Self {
        ReferencePolicy::Single { seed: 0 }
    }
}

fn pick_reference<'a, R: Rng>(dataset: &'a Dataset, rng: &mut R) -> Result<ToyView<'a>> {
    let train = dataset.split(Split::Train);
    if train.is_empty() {
        return Err(Error::Dataset("no training objects to draw a reference from".into()));
    }
    let obj = train[rng.random_range(0..train.len())];
    let e = rng.random_range(0..obj.n_elevations());
    let k = rng.random_range(0..obj.n_poses());
    Ok(obj.view(e, k))
}

/// Predict the absolute pose of every view in `split` by comparing its orbit
/// with a reference orbit of known pose.
pub fn evaluate<S: OrbitSource + ?Sized>(
    source: &S,
    dataset: &Dataset,
    split: Split,
    policy: ReferencePolicy,
) -> Result<EvalReport> {
    source.check_dataset(dataset)?;
    let group = source.group();
    let objects = dataset.split(split);
    if objects.is_empty() {
        return Err(Error::Dataset(format!("split {split:?} has no objects")));
    }
    let (seed, per_object) = match policy {
        ReferencePolicy::Single { seed } => (seed, false),
        ReferencePolicy::PerObject { seed } => (seed, true),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reference = None;
    let mut records = Vec::new();
    for obj in objects {
        if per_object || reference.is_none() {
            let view = pick_reference(dataset, &mut rng)?;
            reference = Some((view.theta, source.orbit_of_view(&view)?));
        }
        let (theta_ref, ref_orbit) = reference.as_ref().expect("set above");
        for e in 0..obj.n_elevations() {
            for k in 0..obj.n_poses() {
                let view = obj.view(e, k);
                let orbit = source.orbit_of_view(&view)?;
                let diff = estimate_shift_directed(ref_orbit, &orbit)?;
                let pred = gauge_absolute_pose(*theta_ref, &diff, group);
                records.push(PoseRecord::new(obj.object_id, view.theta, pred));
            }
        }
    }
    EvalReport::from_records(records, group)
}

/// Angle in degrees between `encode(view at θ+Δθ).f_pose` and
/// `p·encode(view at θ).f_pose`, for every view in `split`.
pub fn equivariance_errors(params: &ModelParams, dataset: &Dataset, split: Split) -> Result<Vec<f64>> {
    params.check_dataset(dataset)?;
    let p = params.generator();
    let mut errs = Vec::new();
    for obj in dataset.split(split) {
        for e in 0..obj.n_elevations() {
            let poses: Vec<[f64; 2]> = (0..obj.n_poses())
                .map(|k| params.encode(&obj.view(e, k).image_f64()).map(|c| c.f_pose))
                .collect::<Result<_>>()?;
            for k in 0..poses.len() {
                let predicted = p.apply_power(1, poses[k]);
                let actual = poses[(k + 1) % poses.len()];
                let a = predicted[1].atan2(predicted[0]);
                let b = actual[1].atan2(actual[0]);
                errs.push(angular_error(b, a));
            }
        }
    }
    Ok(errs)
}

const SVG_SIZE: f64 = 400.0;
const SVG_MARGIN: f64 = 40.0;

/// Canvas coordinates of each orbit point (y pointing down).
pub fn svg_points(orbit: &Orbit) -> Vec<(f64, f64)> {
    let extent = orbit
        .points()
        .iter()
        .map(|p| p[0].abs().max(p[1].abs()))
        .fold(0.0, f64::max)
        .max(1e-12);
    let half = SVG_SIZE / 2.0;
    let scale = (half - SVG_MARGIN) / extent;
    orbit
        .points()
        .iter()
        .map(|p| (half + p[0] * scale, half - p[1] * scale))
        .collect()
}

/// Dashed circle through the orbit, initial point filled, every point
/// labelled with its step index.
pub fn orbit_svg(orbit: &Orbit) -> String {
    let pts = svg_points(orbit);
    let half = SVG_SIZE / 2.0;
    let radius = pts
        .iter()
        .map(|(x, y)| (x - half).hypot(y - half))
        .sum::<f64>()
        / pts.len() as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<circle cx="{half}" cy="{half}" r="{radius:.3}" fill="none" stroke="gray" stroke-dasharray="6 4"/>"#
    );
    for (k, (x, y)) in pts.iter().enumerate() {
        let (r, fill) = if k == 0 { (6.0, "black") } else { (3.5, "none") };
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r}" fill="{fill}" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="9" fill="dimgray">{k}</text>"#,
            x + 6.0,
            y - 6.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Write `<prefix>.csv` and, when `with_plot`, `<prefix>.svg`.
pub fn export_orbit(orbit: &Orbit, prefix: impl AsRef<Path>, with_plot: bool) -> Result<()> {
    let prefix = prefix.as_ref();
    write_orbit_csv(orbit, prefix.with_extension("csv"))?;
    if with_plot {
        let path = prefix.with_extension("svg");
        std::fs::write(&path, orbit_svg(orbit)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
