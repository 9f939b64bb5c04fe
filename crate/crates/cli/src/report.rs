use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use anyhow::Result;
use serde_json::{json, Map, Value as Json};

use synb_core::dataset::{DatasetContainer, DatasetKind};

fn numeric_summary(v: &[f64]) -> Json {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    json!({ "mean": mean, "std": var.sqrt(), "min": min, "max": max })
}

fn fraction(c: &DatasetContainer, flag: impl Fn(&Json) -> bool, records: &[Json]) -> f64 {
    records.iter().filter(|r| flag(r)).count() as f64 / c.len() as f64
}

/// Summary of a container as JSON.
pub fn inspect(c: &DatasetContainer) -> Result<Json> {
    let records: Vec<Json> = (0..c.len()).map(|i| c.record(i)).collect::<Result<_, _>>()?;
    let mut labels = Map::new();
    for (name, l) in &c.labels {
        let distinct: BTreeSet<i64> = l.iter().copied().collect();
        labels.insert(
            name.clone(),
            json!({
                "distinct": distinct.len(),
                "min": distinct.first(),
                "max": distinct.last(),
            }),
        );
    }
    let mut splits = Map::new();
    splits.insert("default".into(), json!(c.splits.sizes()));
    for (name, s) in &c.named_splits {
        splits.insert(name.clone(), json!(s.sizes()));
    }
    let px = c.pixels();
    let empty = (0..c.len()).filter(|&i| c.mask(i).iter().all(|&m| m == 0)).count();

    let mut attributes = Map::new();
    let mut flags = Map::new();
    match c.manifest.kind {
        DatasetKind::Symbols => {
            for path in ["scale", "rotation", "translation.0", "translation.1"] {
                if let Ok(v) = c.numeric_attribute(path) {
                    attributes.insert(path.into(), numeric_summary(&v));
                }
            }
            for name in ["bold", "italic"] {
                let f = fraction(c, |r| r["attributes"][name].as_bool() == Some(true), &records);
                attributes.insert(name.into(), json!({ "fraction_true": f }));
            }
            for name in ["char", "font", "language"] {
                let mut counts: BTreeMap<String, usize> = BTreeMap::new();
                for r in &records {
                    let v = &r["attributes"][name];
                    *counts.entry(v.as_str().map(str::to_owned).unwrap_or_else(|| v.to_string())).or_default() += 1;
                }
                attributes.insert(name.into(), json!({ "distinct": counts.len() }));
            }
            flags.insert("label_corrupted".into(), json!(fraction(c, |r| r["label_corrupted"] == true, &records)));
            flags.insert("label_changed".into(), json!(fraction(c, |r| r["label_noisy"] != r["class"], &records)));
            flags.insert("pixel_noise".into(), json!(fraction(c, |r| r["pixel_noise"] == true, &records)));
            flags.insert("missing".into(), json!(fraction(c, |r| r["missing"] == true, &records)));
            flags.insert(
                "occluded".into(),
                json!(fraction(c, |r| r["occluders"].as_array().is_some_and(|a| !a.is_empty()), &records)),
            );
        }
        DatasetKind::Scenes => {
            let counts: Vec<f64> = records.iter().map(|r| r["symbols"].as_array().map_or(0, Vec::len) as f64).collect();
            let target: Vec<f64> = records.iter().filter_map(|r| r["target_count"].as_f64()).collect();
            attributes.insert("symbols_per_scene".into(), numeric_summary(&counts));
            attributes.insert("target_count".into(), numeric_summary(&target));
            flags.insert("overlap".into(), json!(fraction(c, |r| r["overlap"] == true, &records)));
        }
    }

    Ok(json!({
        "samples": c.len(),
        "resolution": [c.height, c.width],
        "kind": c.manifest.kind,
        "recipe": c.manifest.recipe,
        "seed": c.manifest.master_seed,
        "classes": c.manifest.classes.len(),
        "fonts": c.manifest.fonts.len(),
        "labels": labels,
        "splits": splits,
        "empty_mask_fraction": empty as f64 / c.len() as f64,
        "mean_mask_coverage": c.masks.iter().map(|&m| f64::from(m)).sum::<f64>() / (255.0 * (c.len() * px) as f64),
        "flags": flags,
        "attributes": attributes,
        "manifest": c.manifest,
    }))
}

/// Human-readable form of [`inspect`].
pub fn render_text(r: &Json) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "samples: {}", r["samples"]);
    let _ = writeln!(s, "resolution: {}x{}", r["resolution"][0], r["resolution"][1]);
    let _ = writeln!(s, "kind: {}", r["kind"].as_str().unwrap_or_default());
    let _ = writeln!(s, "recipe: {}", r["recipe"].as_str().unwrap_or_default());
    let _ = writeln!(s, "seed: {}", r["seed"]);
    let _ = writeln!(s, "classes: {}", r["classes"]);
    let _ = writeln!(s, "fonts: {}", r["fonts"]);
    let _ = writeln!(s, "empty-mask fraction: {:.4}", r["empty_mask_fraction"].as_f64().unwrap_or_default());
    let _ = writeln!(s, "labels:");
    for (k, v) in r["labels"].as_object().into_iter().flatten() {
        let _ = writeln!(s, "  {k}: {} distinct in [{}, {}]", v["distinct"], v["min"], v["max"]);
    }
    let _ = writeln!(s, "splits (train, valid, test):");
    for (k, v) in r["splits"].as_object().into_iter().flatten() {
        let _ = writeln!(s, "  {k}: {}, {}, {}", v[0], v[1], v[2]);
    }
    let _ = writeln!(s, "flags:");
    for (k, v) in r["flags"].as_object().into_iter().flatten() {
        let _ = writeln!(s, "  {k}: {:.4}", v.as_f64().unwrap_or_default());
    }
    let _ = writeln!(s, "attributes:");
    for (k, v) in r["attributes"].as_object().into_iter().flatten() {
        let _ = writeln!(s, "  {k}: {v}");
    }
    let _ = writeln!(s, "manifest:");
    let _ = writeln!(s, "{}", serde_json::to_string_pretty(&r["manifest"]).unwrap_or_default());
    s
}
