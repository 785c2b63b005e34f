//! The cyclic azimuth group and its 2-D latent counterpart.
//!
//! Run with `cargo run --example group_algebra`.

use orbitpose::group::{angle_steps, make_generator_3d, pose_set, GroupParams, LatentGenerator};

fn main() -> orbitpose::Result<()> {
    let group = GroupParams::new(36)?;
    println!("K = {}, step = {:.1} degrees", group.order(), group.delta_theta().to_degrees());

    let g = make_generator_3d(group.delta_theta())?;
    let mut v = [1.0, 0.0, 0.3];
    for _ in 0..group.order() {
        v = g.apply(v);
    }
    println!("g applied K times to (1, 0, 0.3): ({:.12}, {:.12}, {:.12})", v[0], v[1], v[2]);

    let p = LatentGenerator::new(group);
    let f = [0.8, 0.0];
    for k in [0, 9, 18, 27, 36, -9] {
        let q = p.apply_power(k, f);
        println!("p^{k:<3} (0.8, 0) = ({:+.6}, {:+.6})", q[0], q[1]);
    }

    // Homomorphism: rotating by a then b equals rotating by a + b.
    let (a, b) = (7, 40);
    let lhs = p.apply_power(b, p.apply_power(a, f));
    let rhs = p.apply_power(a + b, f);
    println!("p^{b}·p^{a}·f - p^{}·f = ({:.1e}, {:.1e})", a + b, lhs[0] - rhs[0], lhs[1] - rhs[1]);

    let poses = pose_set(group);
    println!("pose set: {} angles, last {:.1} degrees", poses.len(), poses[35].to_degrees());
    let steps = angle_steps(350f64.to_radians(), 20f64.to_radians(), group)?;
    println!("350 deg -> 20 deg is {steps} steps");
    match angle_steps(0.0, 5f64.to_radians(), group) {
        Ok(n) => println!("0 -> 5 deg: {n}"),
        Err(e) => println!("0 -> 5 deg rejected: {e}"),
    }
    Ok(())
}
