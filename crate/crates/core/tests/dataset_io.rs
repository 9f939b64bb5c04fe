mod common;

use std::path::Path;

use rand::Rng;
use sha2::{Digest, Sha256};
use synb_core::attributes::{Distribution, Value};
use synb_core::dataset::{
    dump_sample, generate_dataset, generate_symbols, preview, preview_size, regenerate, sidecar_path, DatasetContainer,
    DatasetError, DatasetKind, Format,
};
use synb_core::partition::split_iid;
use synb_core::recipe::{builtin, Plan};

use common::catalog;

fn dataset(recipe: &str, n: usize, seed: u64) -> DatasetContainer {
    generate_dataset(catalog(), &builtin(recipe).unwrap(), n, seed, 2).unwrap()
}

fn digest(path: &Path) -> Vec<u8> {
    Sha256::digest(std::fs::read(path).unwrap()).to_vec()
}

#[test]
fn round_trip_both_formats() {
    let c = dataset("default", 1000, 1);
    let dir = tempfile::tempdir().unwrap();
    for name in ["d.h5", "d.npz"] {
        let path = dir.path().join(name);
        c.write(&path, None).unwrap();
        let back = DatasetContainer::read(&path).unwrap();
        assert!(back.same_content(&c), "{name}");
        assert_eq!(back.manifest, c.manifest, "{name}");
        assert!(sidecar_path(&path).exists());
    }
}

#[test]
fn scene_round_trip() {
    let c = dataset("counting-fixed", 20, 2);
    assert_eq!(c.manifest.kind, DatasetKind::Scenes);
    let dir = tempfile::tempdir().unwrap();
    for name in ["s.h5", "s.npz"] {
        let path = dir.path().join(name);
        c.write(&path, None).unwrap();
        let back = DatasetContainer::read(&path).unwrap();
        assert!(back.same_content(&c), "{name}");
        assert!(back.instances.is_some());
    }
}

#[test]
fn named_splits_survive_round_trip() {
    let mut c = dataset("default", 200, 3);
    c.add_split("shuffled", &split_iid(200, [0.5, 0.25, 0.25], 9).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for name in ["d.h5", "d.npz"] {
        let path = dir.path().join(name);
        c.write(&path, None).unwrap();
        let back = DatasetContainer::read(&path).unwrap();
        assert_eq!(back.named_splits, c.named_splits);
        assert_eq!(back.named_splits["shuffled"].sizes(), [100, 50, 50]);
    }
}

#[test]
fn npz_is_byte_stable() {
    let mut a = dataset("default", 100, 4);
    let mut b = dataset("default", 100, 4);
    a.manifest.created_unix = 0;
    b.manifest.created_unix = 0;
    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (dir.path().join("a.npz"), dir.path().join("b.npz"));
    a.write(&pa, None).unwrap();
    b.write(&pb, None).unwrap();
    assert_eq!(digest(&pa), digest(&pb));
}

#[test]
fn format_errors() {
    let c = dataset("default", 10, 5);
    let dir = tempfile::tempdir().unwrap();
    let err = c.write(&dir.path().join("d.h5"), Some(Format::Npz)).unwrap_err();
    assert!(matches!(err, DatasetError::FormatMismatch { format: Format::Npz, .. }), "{err}");
    let err = c.write(&dir.path().join("d.bin"), None).unwrap_err();
    assert!(matches!(err, DatasetError::UnknownFormat { .. }), "{err}");
    let err = DatasetContainer::read(&dir.path().join("missing.h5")).unwrap_err();
    assert!(matches!(err, DatasetError::Io { .. }), "{err}");
}

#[test]
fn corrupt_files_are_detected() {
    let c = dataset("default", 50, 6);
    let dir = tempfile::tempdir().unwrap();
    for name in ["d.h5", "d.npz"] {
        let path = dir.path().join(name);
        c.write(&path, None).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(DatasetContainer::read(&path).is_err(), "truncated {name} was accepted");
        std::fs::write(&path, b"not a dataset").unwrap();
        assert!(DatasetContainer::read(&path).is_err(), "garbage {name} was accepted");
    }
}

#[test]
fn single_sample_dataset() {
    let c = dataset("default", 1, 7);
    assert_eq!(c.len(), 1);
    assert_eq!(c.splits.sizes(), [1, 0, 0]);
    assert!(matches!(
        generate_dataset(catalog(), &builtin("default").unwrap(), 0, 7, 1),
        Err(DatasetError::Empty)
    ));
}

#[test]
fn workers_do_not_change_output() {
    let recipe = builtin("al-occluded").unwrap();
    let a = generate_dataset(catalog(), &recipe, 300, 8, 1).unwrap();
    let b = generate_dataset(catalog(), &recipe, 300, 8, 8).unwrap();
    assert!(a.same_content(&b));
}

#[test]
fn labels_and_default_split() {
    let c = dataset("al-label-noise", 500, 9);
    assert_eq!(c.splits.sizes(), [300, 100, 100]);
    let mut all: Vec<u64> = c.splits.sets().iter().flat_map(|s| s.1.iter().copied()).collect();
    all.sort_unstable();
    assert_eq!(all, (0..500).collect::<Vec<_>>());
    for i in 0..c.len() {
        let r = c.record(i).unwrap();
        assert_eq!(r["index"], i);
        assert_eq!(r["class"], c.labels["clean"][i]);
        assert_eq!(r["label_noisy"], c.labels["noisy"][i]);
        let font = r["attributes"]["font"].as_str().unwrap();
        assert_eq!(c.manifest.fonts[c.labels["font"][i] as usize], font);
        let (lang, ch) = &c.manifest.classes[c.labels["clean"][i] as usize];
        assert_eq!(lang, r["attributes"]["language"].as_str().unwrap());
        assert_eq!(ch.to_string(), r["attributes"]["char"].as_str().unwrap());
    }
}

#[test]
fn regeneration_reproduces_payload() {
    for recipe in ["default", "camouflage", "counting-variable"] {
        let c = dataset(recipe, 40, 10);
        let again = regenerate(catalog(), &c.manifest, 3).unwrap();
        assert!(again.same_content(&c), "{recipe}");
    }
}

#[test]
fn custom_generators_are_not_portable() {
    let recipe = builtin("default").unwrap();
    let Plan::Symbols { sampler, corruption } = recipe.plan(catalog()).unwrap() else { unreachable!() };
    let sampler = sampler
        .with_override("scale", Distribution::generator("u(0.4, 0.5)", |rng| Ok(Value::Float(rng.gen_range(0.4..0.5)))))
        .unwrap();
    let c = generate_symbols(catalog(), &recipe, sampler, corruption, 20, 11, 1).unwrap();
    assert!(!c.manifest.portable);
    assert!(c.numeric_attribute("scale").unwrap().iter().all(|s| (0.4..0.5).contains(s)));
    assert!(matches!(regenerate(catalog(), &c.manifest, 1), Err(DatasetError::Invalid(_))));
}

#[test]
fn split_names() {
    let mut c = dataset("default", 30, 12);
    let p = split_iid(30, [0.6, 0.2, 0.2], 1).unwrap();
    for bad in ["", "train", "valid", "test", "a/b"] {
        assert!(c.add_split(bad, &p).is_err(), "{bad:?} accepted");
    }
    assert!(c.add_split("other", &split_iid(29, [0.6, 0.2, 0.2], 1).unwrap()).is_err());
    c.add_split("other", &p).unwrap();
    assert_eq!(c.named_splits["other"].info["strategy"], "iid");
}

#[test]
fn attribute_lookup() {
    let c = dataset("default", 20, 13);
    assert_eq!(c.numeric_attribute("translation.1").unwrap().len(), 20);
    assert!(c.attribute_values("char").unwrap().iter().all(|v| v.is_string()));
    assert_eq!(c.attribute_values("index").unwrap()[5], 5);
    assert!(matches!(c.attribute_values("nope"), Err(DatasetError::UnknownAttribute(_))));
    assert!(c.numeric_attribute("font").is_err());
}

#[test]
fn preview_grid() {
    let c = dataset("default", 12, 14);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.png");
    preview(&c, 3, 4, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    // PNG IHDR: width then height, big endian, at offset 16.
    let w = u32::from_be_bytes(bytes[16..20].try_into().unwrap()) as usize;
    let h = u32::from_be_bytes(bytes[20..24].try_into().unwrap()) as usize;
    assert_eq!((h, w), preview_size(32, 32, 3, 4));
    assert_eq!((h, w), (3 * 33 + 1, 4 * 33 + 1));
    assert!(preview(&c, 4, 4, &path).is_err());
    assert!(preview(&c, 0, 4, &path).is_err());
}

#[test]
fn dump_one_sample() {
    let c = dataset("default", 5, 15);
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("s3");
    dump_sample(&c, 3, &prefix).unwrap();
    let rec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(prefix.with_extension("json")).unwrap()).unwrap();
    assert_eq!(rec, c.record(3).unwrap());
    assert!(prefix.with_extension("png").exists());
    assert!(dump_sample(&c, 5, &prefix).is_err());
}
