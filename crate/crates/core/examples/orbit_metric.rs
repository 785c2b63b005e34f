//! Comparing latent orbits: shift profiles, noisy recovery, and gauging a
//! relative step count into an absolute pose.
//!
//! Run with `cargo run --example orbit_metric`.

use orbitpose::group::{GroupParams, LatentGenerator};
use orbitpose::metric::{
    estimate_shift_directed, estimate_shift_symmetric, gauge_absolute_pose, shift_profile, Direction,
};
use orbitpose::model::Orbit;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> orbitpose::Result<()> {
    let group = GroupParams::default();
    let p = LatentGenerator::new(group);
    let reference = Orbit::generate([0.8, 0.0], &p);
    let test = reference.advanced(7);

    let profile = shift_profile(&reference, &test, Direction::Forward)?;
    println!("forward profile around the peak:");
    for d in 4..=10 {
        println!("  M({d:2}) = {:+.4}", profile.scores[d]);
    }
    let fwd = estimate_shift_directed(&reference, &test)?;
    let sym = estimate_shift_symmetric(&reference, &test)?;
    println!(
        "directed: {} steps ({:.0} deg, margin {:.4}); symmetric: {} steps",
        fwd.delta_steps,
        fwd.delta_angle.to_degrees(),
        fwd.margin,
        sym.delta_steps
    );

    let theta_ref = 30f64.to_radians();
    let theta = gauge_absolute_pose(theta_ref, &fwd, group);
    println!("reference at 30 deg gauges the test view to {:.0} deg", theta.to_degrees());

    // Recovery under per-element Gaussian noise.
    let noise = Normal::new(0.0, 0.05).expect("valid sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut correct = 0;
    let trials = 36 * 20;
    for t in 0..trials {
        let shift = t % 36;
        let noisy: Vec<[f64; 2]> = reference
            .advanced(shift as i64)
            .points()
            .iter()
            .map(|q| [q[0] + noise.sample(&mut rng), q[1] + noise.sample(&mut rng)])
            .collect();
        let est = estimate_shift_directed(&reference, &Orbit::from_points(noisy)?)?;
        correct += usize::from(est.delta_steps == shift);
    }
    println!("noise sigma 0.05: {correct}/{trials} shifts recovered");
    Ok(())
}
