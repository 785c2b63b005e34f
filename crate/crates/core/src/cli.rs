//! Command-line front end: `synth`, `train`, `orbit`, `compare`, `eval`.
//!
//! Every subcommand takes `--seed`, `--config` (a plain `key = value` file)
//! and `--out`. Exit codes: 0 success, 1 usage error, 2 data or model error,
//! 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::eval::{evaluate, export_orbit, ErrorMode, ReferencePolicy};
use crate::group::GroupParams;
use crate::metric::{estimate_shift_directed, estimate_shift_symmetric, read_orbit_csv};
use crate::model::{ModelConfig, ModelParams};
use crate::objective::{LossWeights, PixelNorm};
use crate::toydata::{build_dataset, Dataset, DatasetSpec, Split};
use crate::trainer::{history_csv, Trainer, TrainerConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "orbitpose", version, about = "Relative pose from latent orbits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for every random choice the command makes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `key = value` settings file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a toy dataset into a directory.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model on a dataset directory.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export the latent orbit of one dataset view as CSV (and SVG).
    Orbit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        object: usize,
        #[arg(long, default_value_t = 0)]
        pose: usize,
        #[arg(long, default_value_t = 0)]
        elevation: usize,
        /// Output path prefix; `.csv` and `.svg` are appended.
        #[arg(long)]
        out: PathBuf,
        /// Skip the SVG plot.
        #[arg(long)]
        no_plot: bool,
    },
    /// Estimate the pose step between two orbit CSV files.
    Compare {
        #[command(flatten)]
        common: Common,
        reference: PathBuf,
        test: PathBuf,
        /// Use the symmetric (min of both directions) estimate.
        #[arg(long)]
        symmetric: bool,
        /// Also write the result to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gauge every view of a split against a reference and report accuracy.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Everything a settings file can override.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub dataset: DatasetSpec,
    pub model: ModelConfig,
    pub trainer: TrainerConfig,
    pub split: Split,
    pub per_object_reference: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            dataset: DatasetSpec::default(),
            model: ModelConfig::default(),
            trainer: TrainerConfig::default(),
            split: Split::HeldOut,
            per_object_reference: false,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidParam(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|v| parse_num(key, v.trim()))
        .collect()
}

fn parse_weights(key: &str, value: &str) -> Result<LossWeights> {
    match parse_list::<f64>(key, value)?.as_slice() {
        &[a, b, c] => LossWeights::new(a, b, c),
        _ => Err(Error::InvalidParam(format!("`{key}` needs three weights"))),
    }
}

impl Settings {
    /// Parse `key = value` lines; `#` starts a comment. Unknown keys are
    /// rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParam(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            s.set(key.trim(), value.trim())?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "n_objects" => self.dataset.n_objects = parse_num(key, v)?,
            "group_order" => {
                let g = GroupParams::new(parse_num(key, v)?)?;
                self.dataset.group = g;
                self.model.group = g;
            }
            "elevations_deg" => self.dataset.elevations_deg = parse_list(key, v)?,
            "image_size" => {
                let n = parse_num(key, v)?;
                self.dataset.image_size = n;
                self.model.image_size = n;
            }
            "complexity" => self.dataset.complexity = parse_num(key, v)?,
            "d_id" => self.model.d_id = parse_num(key, v)?,
            "hidden_sizes" => self.model.hidden_sizes = parse_list(key, v)?,
            "c" => self.model.c = parse_num(key, v)?,
            "lr0" => self.trainer.lr0 = parse_num(key, v)?,
            "gamma" => self.trainer.gamma = parse_num(key, v)?,
            "decay_every" => self.trainer.decay_every = parse_num(key, v)?,
            "batch_size" => self.trainer.batch_size = parse_num(key, v)?,
            "stage1_iters" => self.trainer.stage1_iters = parse_num(key, v)?,
            "stage2_iters" => self.trainer.stage2_iters = parse_num(key, v)?,
            "stage1_weights" => self.trainer.stage1_weights = parse_weights(key, v)?,
            "stage2_weights" => self.trainer.stage2_weights = parse_weights(key, v)?,
            "rho" => self.trainer.rho = parse_num(key, v)?,
            "epsilon" => self.trainer.epsilon = parse_num(key, v)?,
            "checkpoint_every" => self.trainer.checkpoint_every = parse_num(key, v)?,
            "pixel_norm" => {
                self.trainer.pixel_norm = match v {
                    "per_pixel" => PixelNorm::PerPixel,
                    "sum" => PixelNorm::Sum,
                    _ => return Err(Error::InvalidParam(format!("`pixel_norm`: unknown `{v}`"))),
                }
            }
            "split" => {
                self.split = match v {
                    "train" => Split::Train,
                    "held_out" => Split::HeldOut,
                    "style_shifted" => Split::StyleShifted,
                    _ => return Err(Error::InvalidParam(format!("`split`: unknown `{v}`"))),
                }
            }
            "reference" => {
                self.per_object_reference = match v {
                    "single" => false,
                    "per_object" => true,
                    _ => return Err(Error::InvalidParam(format!("`reference`: unknown `{v}`"))),
                }
            }
            _ => return Err(Error::InvalidParam(format!("unknown setting `{key}`"))),
        }
        Ok(())
    }
}

fn settings(common: &Common) -> Result<Settings> {
    match &common.config {
        Some(path) => Settings::load(path),
        None => Ok(Settings::default()),
    }
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else if matches!(err, Error::InvalidParam(_)) {
        EXIT_USAGE
    } else {
        EXIT_DATA
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn cmd_synth(common: &Common, out: &Path) -> Result<()> {
    let mut spec = settings(common)?.dataset;
    spec.seed = common.seed;
    let dataset = build_dataset(&spec)?;
    dataset.write(out)?;
    println!(
        "wrote {} objects x {} views to {}",
        dataset.objects.len(),
        spec.group.order() * spec.elevations_deg.len(),
        out.display()
    );
    Ok(())
}

fn cmd_train(common: &Common, data: &Path, out: &Path) -> Result<()> {
    let s = settings(common)?;
    let dataset = Dataset::load(data)?;
    let model_cfg = ModelConfig {
        image_size: dataset.spec.image_size,
        group: dataset.group(),
        seed: common.seed,
        ..s.model
    };
    let cfg = TrainerConfig {
        seed: common.seed,
        ..s.trainer
    };
    create_dir(out)?;
    let mut trainer = Trainer::new(ModelParams::init(model_cfg)?, cfg.clone())?;
    let result = trainer.run(&dataset, Some(out));
    write_file(&out.join("loss_history.csv"), &history_csv(trainer.history()))?;
    if let Err(Error::NonFiniteLoss { iter, snapshot }) = &result {
        snapshot.save(out.join("failed_snapshot.opose"))?;
        eprintln!("non-finite loss at iteration {iter}; snapshot saved");
    }
    result?;
    trainer.params().save(out.join("model.opose"))?;
    if let Some(last) = trainer.history().last() {
        println!(
            "trained {} iterations; final loss {:.5} (recon {:.5}, radius {:.5}, pair {:.5})",
            cfg.total_iters(),
            last.report.total,
            last.report.recon,
            last.report.radius,
            last.report.pair
        );
    }
    Ok(())
}

fn cmd_orbit(
    model: &Path,
    data: &Path,
    object: usize,
    pose: usize,
    elevation: usize,
    out: &Path,
    plot: bool,
) -> Result<()> {
    let params = ModelParams::load(model)?;
    let dataset = Dataset::load(data)?;
    let obj = dataset
        .objects
        .iter()
        .find(|o| o.object_id == object)
        .ok_or_else(|| Error::Dataset(format!("no object with id {object}")))?;
    if elevation >= obj.n_elevations() || pose >= obj.n_poses() {
        return Err(Error::Dataset(format!(
            "view (elevation {elevation}, pose {pose}) is outside the dataset grid"
        )));
    }
    let image = obj.view(elevation, pose).image_f64();
    if image.len() != params.config().pixels() {
        return Err(Error::Dataset(
            "checkpoint and dataset disagree on image size".into(),
        ));
    }
    let orbit = params.orbit_of(&image)?;
    export_orbit(&orbit, out, plot)?;
    println!("wrote {}", out.with_extension("csv").display());
    Ok(())
}

fn cmd_compare(reference: &Path, test: &Path, symmetric: bool, out: Option<&Path>) -> Result<()> {
    let r = read_orbit_csv(reference)?;
    let t = read_orbit_csv(test)?;
    let diff = if symmetric {
        estimate_shift_symmetric(&r, &t)?
    } else {
        estimate_shift_directed(&r, &t)?
    };
    let text = format!(
        "delta_steps {}\nangle_deg {}\nmargin {}\n",
        diff.delta_steps,
        diff.delta_angle.to_degrees(),
        diff.margin
    );
    print!("{text}");
    if let Some(path) = out {
        write_file(path, &text)?;
    }
    Ok(())
}

fn cmd_eval(common: &Common, model: &Path, data: &Path, out: &Path) -> Result<()> {
    let s = settings(common)?;
    let params = ModelParams::load(model)?;
    let dataset = Dataset::load(data)?;
    let policy = if s.per_object_reference {
        ReferencePolicy::PerObject { seed: common.seed }
    } else {
        ReferencePolicy::Single { seed: common.seed }
    };
    let report = evaluate(&params, &dataset, s.split, policy)?;
    create_dir(out)?;
    write_file(&out.join("report.json"), &report.to_json())?;
    write_file(&out.join("confusion.csv"), &report.confusion_csv())?;
    println!(
        "accuracy-{} {:.4}  exact {:.4}  nearby {:.4}  others {:.4}  opposite {:.4}  ({} views)",
        report.group_order,
        report.accuracy_k,
        report.fraction(ErrorMode::Exact),
        report.fraction(ErrorMode::Nearby),
        report.fraction(ErrorMode::Others),
        report.fraction(ErrorMode::Opposite),
        report.records.len()
    );
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth { common, out } => cmd_synth(common, out),
        Command::Train { common, data, out } => cmd_train(common, data, out),
        Command::Orbit {
            common,
            model,
            data,
            object,
            pose,
            elevation,
            out,
            no_plot,
        } => {
            settings(common)?;
            cmd_orbit(model, data, *object, *pose, *elevation, out, !no_plot)
        }
        Command::Compare {
            common,
            reference,
            test,
            symmetric,
            out,
        } => {
            settings(common)?;
            cmd_compare(reference, test, *symmetric, out.as_deref())
        }
        Command::Eval {
            common,
            model,
            data,
            out,
        } => cmd_eval(common, model, data, out),
    }
}

/// Parse `args` (program name first), run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_parse_overrides() {
        let s = Settings::parse(
            "# comment\nn_objects = 12\nhidden_sizes = 64, 32\nstage1_weights = 10,1,2\n\npixel_norm = sum\nreference = per_object\n",
        )
        .unwrap();
        assert_eq!(s.dataset.n_objects, 12);
        assert_eq!(s.model.hidden_sizes, vec![64, 32]);
        assert_eq!(s.trainer.stage1_weights, LossWeights::new(10.0, 1.0, 2.0).unwrap());
        assert_eq!(s.trainer.pixel_norm, PixelNorm::Sum);
        assert!(s.per_object_reference);
    }

    #[test]
    fn settings_group_order_applies_to_data_and_model() {
        let s = Settings::parse("group_order = 12").unwrap();
        assert_eq!(s.dataset.group.order(), 12);
        assert_eq!(s.model.group.order(), 12);
    }

    #[test]
    fn settings_reject_unknown_and_malformed() {
        assert!(matches!(Settings::parse("bogus = 1"), Err(Error::InvalidParam(_))));
        assert!(matches!(Settings::parse("n_objects"), Err(Error::InvalidParam(_))));
        assert!(matches!(Settings::parse("n_objects = many"), Err(Error::InvalidParam(_))));
        assert!(Settings::parse("stage1_weights = 1,2").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["orbitpose"]), EXIT_USAGE);
        assert_eq!(run(["orbitpose", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["orbitpose", "synth"]), EXIT_USAGE);
        assert_eq!(run(["orbitpose", "--help"]), EXIT_OK);
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::InvalidParam("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Dataset("x".into())), EXIT_DATA);
        assert_eq!(exit_code(&Error::DegenerateOrbit { norm: 0.0 }), EXIT_NUMERICAL);
    }
}
