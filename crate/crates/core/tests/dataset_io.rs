//! Dataset and checkpoint files on disk.

use std::fs;

use orbitpose::group::GroupParams;
use orbitpose::model::{ModelConfig, ModelParams};
use orbitpose::toydata::{build_dataset, Dataset, DatasetSpec, Split};
use orbitpose::trainer::{Trainer, TrainerConfig};

fn small_spec(seed: u64) -> DatasetSpec {
    DatasetSpec {
        n_objects: 10,
        group: GroupParams::new(12).unwrap(),
        elevations_deg: vec![10.0, 30.0],
        image_size: 12,
        complexity: 6,
        seed,
    }
}

#[test]
fn dataset_round_trip_and_byte_identical_rebuild() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let dataset = build_dataset(&small_spec(4)).unwrap();
    dataset.write(&a).unwrap();
    build_dataset(&small_spec(4)).unwrap().write(&b).unwrap();

    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 11);
    for name in &names {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
    }

    let loaded = Dataset::load(&a).unwrap();
    assert_eq!(loaded.manifest(), dataset.manifest());
    for (x, y) in loaded.objects.iter().zip(&dataset.objects) {
        assert_eq!(x.object_id, y.object_id);
        assert_eq!(x.split, y.split);
        for e in 0..2 {
            for k in 0..12 {
                assert_eq!(x.image(e, k), y.image(e, k));
            }
        }
    }
    assert_eq!(loaded.split(Split::Train).len(), 8);
}

#[test]
fn different_seeds_give_different_objects() {
    let a = build_dataset(&small_spec(1)).unwrap();
    let b = build_dataset(&small_spec(2)).unwrap();
    assert_ne!(a.objects[0].image(0, 0), b.objects[0].image(0, 0));
}

#[test]
fn truncated_blob_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    build_dataset(&small_spec(0)).unwrap().write(tmp.path()).unwrap();
    let blob = tmp.path().join("object_0003.bin");
    let bytes = fs::read(&blob).unwrap();
    fs::write(&blob, &bytes[..bytes.len() - 5]).unwrap();
    assert!(Dataset::load(tmp.path()).is_err());
}

#[test]
fn trainer_checkpoints_reload_bit_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let dataset = build_dataset(&small_spec(0)).unwrap();
    let model = ModelConfig {
        image_size: 12,
        d_id: 4,
        hidden_sizes: vec![16, 8],
        group: GroupParams::new(12).unwrap(),
        ..ModelConfig::default()
    };
    let cfg = TrainerConfig {
        batch_size: 2,
        stage1_iters: 6,
        stage2_iters: 4,
        checkpoint_every: 5,
        ..TrainerConfig::default()
    };
    let mut trainer = Trainer::new(ModelParams::init(model).unwrap(), cfg).unwrap();
    trainer.run(&dataset, Some(tmp.path())).unwrap();
    let last = ModelParams::load(tmp.path().join("checkpoint_0000010.opose")).unwrap();
    assert_eq!(&last, trainer.params());
    let mid = ModelParams::load(tmp.path().join("checkpoint_0000005.opose")).unwrap();
    assert_ne!(&mid, trainer.params());
}
