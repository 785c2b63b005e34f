//! Writing an orbit as CSV plus an SVG plot, and reading it back for a
//! comparison.
//!
//! Run with `cargo run --release --example export_orbit [CHECKPOINT] [OUT_DIR]`.
//! Without a checkpoint an ideal radius-0.8 orbit is exported.

use std::path::PathBuf;

use orbitpose::eval::export_orbit;
use orbitpose::group::GroupParams;
use orbitpose::metric::{estimate_shift_directed, read_orbit_csv};
use orbitpose::model::{generate_orbit, ModelParams};
use orbitpose::toydata::{build_dataset, DatasetSpec, Split};

fn main() -> orbitpose::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let out = args
        .get(2)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("orbitpose_orbits"));
    std::fs::create_dir_all(&out).expect("create output directory");

    let (a, b) = match args.get(1) {
        Some(path) => {
            let params = ModelParams::load(path)?;
            let dataset = build_dataset(&DatasetSpec::default())?;
            let obj = dataset.split(Split::HeldOut)[0];
            let first = params.orbit_of(&obj.view(0, 0).image_f64())?;
            let second = params.orbit_of(&obj.view(0, 5).image_f64())?;
            (first, second)
        }
        None => {
            let group = GroupParams::default();
            let first = generate_orbit([0.8, 0.0], group);
            (first.clone(), first.advanced(5))
        }
    };
    export_orbit(&a, out.join("orbit_a"), true)?;
    export_orbit(&b, out.join("orbit_b"), true)?;
    println!("wrote orbit_a/orbit_b .csv and .svg to {}", out.display());

    let a = read_orbit_csv(out.join("orbit_a.csv"))?;
    let b = read_orbit_csv(out.join("orbit_b.csv"))?;
    let diff = estimate_shift_directed(&a, &b)?;
    println!(
        "orbit_b is {} steps ({:.0} deg) ahead of orbit_a, margin {:.4}",
        diff.delta_steps,
        diff.delta_angle.to_degrees(),
        diff.margin
    );
    Ok(())
}
