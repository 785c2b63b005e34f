//! Procedural toy objects, the orthographic renderer, and the on-disk
//! dataset layout.
//!
//! Run with `cargo run --release --example render_dataset [OUT_DIR]`.
//! Writes a contact sheet of all 36 views of one object as a PPM image and a
//! small dataset directory.

use std::path::PathBuf;

use orbitpose::group::GroupParams;
use orbitpose::toydata::{build_dataset, render, synthesize_object, Dataset, DatasetSpec, Split};

fn main() -> orbitpose::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("orbitpose_render"));
    std::fs::create_dir_all(&out).expect("create output directory");

    let group = GroupParams::default();
    let obj = synthesize_object(7, 12)?;
    let azimuths: Vec<String> = obj
        .marker_azimuths()
        .iter()
        .map(|a| format!("{:.0}", a.to_degrees()))
        .collect();
    println!("object: {} points, markers at {} degrees", obj.points().count(), azimuths.join(", "));

    // 6 x 6 contact sheet, one tile per pose.
    let size = 32;
    let (cols, rows) = (6, 6);
    let mut sheet = vec![0u8; cols * size * rows * size * 3];
    for k in 0..group.order() {
        let img = render(&obj, group.angle_of(k as i64), 20f64.to_radians(), size)?;
        let (tr, tc) = (k / cols, k % cols);
        for y in 0..size {
            for x in 0..size {
                for c in 0..3 {
                    let dst = (((tr * size + y) * cols * size) + tc * size + x) * 3 + c;
                    sheet[dst] = (img[(y * size + x) * 3 + c] * 255.0).round() as u8;
                }
            }
        }
    }
    let mut ppm = format!("P6\n{} {}\n255\n", cols * size, rows * size).into_bytes();
    ppm.extend_from_slice(&sheet);
    let sheet_path = out.join("views.ppm");
    std::fs::write(&sheet_path, ppm).expect("write contact sheet");
    println!("wrote {}", sheet_path.display());

    // Rotating the object and rotating the camera agree exactly.
    let step = group.delta_theta();
    let a = render(&obj, 3.0 * step + step, 0.3, size)?;
    let b = render(&obj.rotated(step)?, 3.0 * step, 0.3, size)?;
    println!("render equivariance holds bit-exactly: {}", a == b);

    let spec = DatasetSpec {
        n_objects: 10,
        ..DatasetSpec::default()
    };
    let dataset = build_dataset(&spec)?;
    let dir = out.join("dataset");
    dataset.write(&dir)?;
    let reloaded = Dataset::load(&dir)?;
    println!(
        "dataset: {} train / {} held-out / {} style-shifted objects, reload identical: {}",
        reloaded.split(Split::Train).len(),
        reloaded.split(Split::HeldOut).len(),
        reloaded.split(Split::StyleShifted).len(),
        reloaded.manifest() == dataset.manifest()
    );
    Ok(())
}
