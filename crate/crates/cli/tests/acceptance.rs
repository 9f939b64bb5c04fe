//! End-to-end acceptance checks. Prints one PASS or FAIL line per criterion
//! and exits non-zero when any criterion fails.

#[path = "../../core/tests/common/oracles.rs"]
mod oracles;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_6;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use sha2::{Digest, Sha256};
use synb_core::attributes::SymbolAttributes;
use synb_core::dataset::{generate_dataset, regenerate, DatasetContainer, SymbolPipeline};
use synb_core::fonts::{FontCatalog, BUNDLED_FONT_DIR};
use synb_core::partition::{split_compositional, split_iid, split_stratified_continuous, DEFAULT_RATIOS};
use synb_core::recipe::{builtin, Plan};
use synb_core::render::Renderer;
use synb_core::scene::SceneComposer;

use oracles::{any_pair_overlaps, ks, orientations_differ, same_color_distribution, uniform_gof};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn symbols<'c>(catalog: &'c FontCatalog, recipe: &str) -> SymbolPipeline<'c> {
    match builtin(recipe).unwrap().plan(catalog).unwrap() {
        Plan::Symbols { sampler, corruption } => SymbolPipeline::new(catalog, sampler, corruption).with_recipe(recipe),
        Plan::Scenes { .. } => panic!("{recipe} is a scene recipe"),
    }
}

fn hash(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn payload_hash(c: &DatasetContainer) -> [String; 3] {
    [hash(&[&c.images]), hash(&[&c.masks]), hash(&[c.attributes.join("\n").as_bytes()])]
}

fn determinism(dir: &Path) -> Outcome {
    let mut runs = Vec::new();
    for (name, workers) in [("a.h5", "1"), ("b.h5", "1"), ("c.h5", "8")] {
        let out = dir.join(name);
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_synb"))
            .args(["generate", "--recipe", "default", "--n", "10000", "--seed", "7", "--workers", workers, "--out"])
            .arg(&out)
            .output()
            .unwrap();
        let secs = start.elapsed().as_secs_f64();
        if !status.status.success() {
            return outcome(false, format!("generate failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        let c = DatasetContainer::read(&out).unwrap();
        runs.push((payload_hash(&c), secs));
    }
    let same = runs.iter().all(|r| r.0 == runs[0].0);
    let slowest = runs.iter().map(|r| r.1).fold(0.0, f64::max);
    let times: Vec<String> = runs.iter().map(|r| format!("{:.1}s", r.1)).collect();
    outcome(
        same && slowest <= 60.0,
        format!("3 runs identical: {same}; wall times {} on {} core(s)", times.join(", "), cores()),
    )
}

fn cores() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn iid_ratios() -> Outcome {
    let s = split_iid(100_000, DEFAULT_RATIOS, 7).unwrap().sizes();
    outcome(s == [60_000, 20_000, 20_000], format!("sizes {s:?}"))
}

fn stratified(default_10k: &DatasetContainer) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for attr in ["rotation", "scale"] {
        let v = default_10k.numeric_attribute(attr).unwrap();
        let r = split_stratified_continuous(&v, 0.2, 0.2).unwrap();
        let [train, valid, test] = r.sets().map(|s| s.iter().map(|&i| v[i]).collect::<Vec<_>>());
        let min = |x: &[f64]| x.iter().copied().fold(f64::INFINITY, f64::min);
        let max = |x: &[f64]| x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ok = max(&valid) < min(&train) && min(&train) <= max(&train) && max(&train) < min(&test);
        pass &= ok && r.is_partition_of(v.len());
        detail.push(format!("{attr}: {ok} sizes {:?}", r.sizes()));
    }
    outcome(pass, detail.join("; "))
}

/// Quartile of each value by rank.
fn quartiles(v: &[f64]) -> Vec<usize> {
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    v.iter().map(|x| (sorted.partition_point(|s| s < x) * 4 / v.len()).min(3)).collect()
}

fn compositional(catalog: &FontCatalog) -> Outcome {
    let c = generate_dataset(catalog, &builtin("default").unwrap(), 40_000, 7, cores()).unwrap();
    let rot = c.numeric_attribute("rotation").unwrap();
    let scale = c.numeric_attribute("scale").unwrap();
    let r = split_compositional(&rot, &scale).unwrap();
    let (qa, qb) = (quartiles(&rot), quartiles(&scale));
    let cells = |s: &[usize]| s.iter().map(|&i| (qa[i], qb[i])).collect::<BTreeSet<_>>();
    let test_cells = cells(&r.test);
    let leaked = r.train.iter().filter(|&&i| test_cells.contains(&(qa[i], qb[i]))).count();
    let pick = |v: &[f64], s: &[usize]| s.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let ks_rot = ks(&pick(&rot, &r.train), &pick(&rot, &r.test));
    let ks_scale = ks(&pick(&scale, &r.train), &pick(&scale, &r.test));
    outcome(
        leaked == 0 && !r.test.is_empty() && ks_rot <= 0.15 && ks_scale <= 0.15,
        format!(
            "train samples in test cells {leaked}; KS rotation {ks_rot:.4}, scale {ks_scale:.4}; sizes {:?}",
            r.sizes()
        ),
    )
}

fn camouflage(catalog: &FontCatalog) -> Outcome {
    let p = symbols(catalog, "camouflage");
    let (mut color, mut orient) = (0usize, 0usize);
    let n = 1000;
    for i in 0..n {
        let g = p.generate(7, i).unwrap();
        color += usize::from(same_color_distribution(&g.image, &g.mask, 0.01));
        orient += usize::from(orientations_differ(&g.image, &g.mask, 32, 32, FRAC_PI_6));
    }
    let (fc, fo) = (color as f64 / n as f64, orient as f64 / n as f64);
    outcome(fc >= 0.95 && fo >= 0.95, format!("chi-square pass rate {fc:.3}; orientation pass rate {fo:.3}"))
}

fn corruption_rates(catalog: &FontCatalog) -> Outcome {
    let n = 100_000u64;
    let rate = |recipe: &str, flag: &dyn Fn(&synb_core::dataset::GeneratedSymbol) -> bool| {
        let p = symbols(catalog, recipe);
        (0..n).filter(|&i| flag(&p.generate(7, i).unwrap())).count() as f64 / n as f64
    };
    let checks = [
        ("label", rate("al-label-noise", &|g| g.record["label_corrupted"] == true), 0.100, 0.003),
        ("pixel", rate("al-pixel-noise", &|g| g.record["pixel_noise"] == true), 0.500, 0.005),
        ("empty mask", rate("al-missing", &|g| g.mask.iter().all(|&m| m == 0)), 0.100, 0.003),
        (
            "occluded",
            rate("al-occluded", &|g| g.record["occluders"].as_array().is_some_and(|a| !a.is_empty())),
            0.200,
            0.004,
        ),
    ];
    let pass = checks.iter().all(|(_, got, want, tol)| (got - want).abs() <= *tol);
    let detail: Vec<String> = checks.iter().map(|(k, got, want, tol)| format!("{k} {got:.4} ({want} ± {tol})")).collect();
    outcome(pass, detail.join("; "))
}

/// Predicts from glyph geometry alone whether the symbol reaches the outer
/// pixel ring: rotated extents of the scaled outline, positioned on each axis
/// at `(frame - extent) / 2 * (1 + t)`. Large `|t|` can move a narrow glyph
/// out of the frame entirely.
fn reaches_border(catalog: &FontCatalog, a: &SymbolAttributes) -> bool {
    let g = catalog.glyph_outline(&a.font, a.char, a.bold, a.italic).unwrap();
    let pts: Vec<(f64, f64)> = g.outline.contours.iter().flatten().map(|p| (p.x, p.y)).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        (x0, x1, y0, y1) = (x0.min(x), x1.max(x), y0.min(y), y1.max(y));
    }
    let [h, w] = a.resolution.map(|v| v as f64);
    let k = a.scale * h.min(w) / (x1 - x0).max(y1 - y0);
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let (sin, cos) = a.rotation.sin_cos();
    let (mut rx0, mut rx1, mut ry0, mut ry1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        let (dx, dy) = ((x - cx) * k, (y - cy) * k);
        let (u, v) = (dx * cos - dy * sin, dx * sin + dy * cos);
        (rx0, rx1, ry0, ry1) = (rx0.min(u), rx1.max(u), ry0.min(v), ry1.max(v));
    }
    // (overlaps the frame, enters the outer ring) per axis
    let axis = |frame: f64, extent: f64, t: f64| {
        let lo = (frame - extent) / 2.0 * (1.0 + t);
        let hi = lo + extent;
        (lo < frame && hi > 0.0, lo < 1.0 || hi > frame - 1.0)
    };
    let (x, y) = (axis(w, rx1 - rx0, a.translation[0]), axis(h, ry1 - ry0, a.translation[1]));
    x.0 && y.0 && (x.1 || y.1)
}

fn cropped(catalog: &FontCatalog) -> Outcome {
    let p = symbols(catalog, "al-cropped");
    let n = 10_000u64;
    let (mut measured, mut predicted, mut agree) = (0usize, 0usize, 0usize);
    for i in 0..n {
        let g = p.generate(7, i).unwrap();
        let a: SymbolAttributes = serde_json::from_value(g.record["attributes"].clone()).unwrap();
        let [h, w] = a.resolution;
        let ring = (0..h * w).filter(|&k| k / w == 0 || k / w == h - 1 || k % w == 0 || k % w == w - 1);
        let touches = ring.into_iter().any(|k| g.mask[k] > 0);
        let oracle = reaches_border(catalog, &a);
        measured += usize::from(touches);
        predicted += usize::from(oracle);
        agree += usize::from(touches == oracle);
    }
    let (fm, fp) = (measured as f64 / n as f64, predicted as f64 / n as f64);
    outcome(
        (fm - fp).abs() <= 0.02,
        format!("border-touch fraction {fm:.4} vs oracle {fp:.4}; per-sample agreement {:.4}", agree as f64 / n as f64),
    )
}

/// Per-recipe scene statistics, gathered one scene at a time.
#[derive(Default)]
struct SceneStats {
    counts: Vec<usize>,
    symbols: usize,
    targets: usize,
    scales: Vec<f64>,
    overlap_exact: bool,
}

fn scene_stats(catalog: &FontCatalog, recipe: &str, n: u64, seed: u64) -> SceneStats {
    let Plan::Scenes { alphabet, spec } = builtin(recipe).unwrap().plan(catalog).unwrap() else {
        panic!("{recipe} is not a scene recipe");
    };
    let ([lo, hi], target) = (spec.count, spec.target);
    let renderer = Renderer::new(catalog);
    let composer = SceneComposer::new(&renderer, alphabet, spec).unwrap();
    let mut st = SceneStats { counts: vec![0; (hi - lo + 1) as usize], overlap_exact: true, ..Default::default() };
    for i in 0..n {
        let s = composer.compose(seed, i).unwrap();
        st.counts[s.symbols.len() - lo as usize] += 1;
        st.symbols += s.symbols.len();
        st.targets += s.symbols.iter().filter(|a| a.char == target).count();
        st.scales.extend(s.symbols.iter().map(|a| a.scale));
        if i < 500 {
            let masks: Vec<&[u8]> = s.instance_masks.iter().map(Vec::as_slice).collect();
            st.overlap_exact &= s.overlap == any_pair_overlaps(&masks);
        }
    }
    st
}

fn counting(catalog: &FontCatalog) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (recipe, seed) in [("counting-fixed", 7), ("counting-variable", 8), ("counting-crowded", 9)] {
        let mut st = scene_stats(catalog, recipe, 10_000, seed);
        let (stat, critical) = uniform_gof(&st.counts, 0.01);
        let f = st.targets as f64 / st.symbols as f64;
        let ok = stat < critical && (f - 0.7).abs() <= 0.014 && st.overlap_exact;
        pass &= ok;
        detail.push(format!(
            "{recipe}: count chi-square {stat:.2} < {critical:.2}, target fraction {f:.4}, overlap oracle exact {}",
            st.overlap_exact
        ));
        if recipe == "counting-variable" {
            let draws = &mut st.scales;
            draws.sort_by(f64::total_cmp);
            let median = draws[draws.len() / 2];
            let logs: Vec<f64> = draws.iter().map(|s| (s / 0.1).ln()).collect();
            let mean = logs.iter().sum::<f64>() / logs.len() as f64;
            let std = (logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (logs.len() - 1) as f64).sqrt();
            let ok = (0.097..=0.103).contains(&median) && (0.47..=0.53).contains(&std);
            pass &= ok;
            detail.push(format!("scale median {median:.4}, std of ln(scale / 0.1) {std:.4}"));
        }
    }
    outcome(pass, detail.join("; "))
}

fn fewshot(catalog: &FontCatalog) -> Outcome {
    let c = generate_dataset(catalog, &builtin("fewshot-multilingual").unwrap(), 5000, 7, cores()).unwrap();
    let Plan::Symbols { sampler, .. } = builtin("fewshot-multilingual").unwrap().plan(catalog).unwrap() else {
        unreachable!()
    };
    let mut seen: BTreeMap<String, (BTreeSet<String>, BTreeSet<String>)> = BTreeMap::new();
    for i in 0..c.len() {
        let a = &c.record(i).unwrap()["attributes"];
        let e = seen.entry(a["language"].as_str().unwrap().to_owned()).or_default();
        e.0.insert(a["char"].as_str().unwrap().to_owned());
        e.1.insert(a["font"].as_str().unwrap().to_owned());
    }
    let mut pass = sampler.alphabets().len() >= 3 && seen.len() >= 3;
    let mut detail = Vec::new();
    for alpha in sampler.alphabets() {
        let (syms, fonts) = (alpha.codepoints.len(), alpha.fonts.len());
        let used = seen.get(&alpha.language).map_or((0, 0), |(s, f)| (s.len(), f.len()));
        pass &= syms <= 200 && fonts <= 200 && used.0 <= syms && used.1 <= fonts;
        detail.push(format!("{} {syms} symbols / {fonts} fonts", alpha.language));
    }
    outcome(pass, format!("{} languages: {}", sampler.alphabets().len(), detail.join(", ")))
}

fn io_round_trip(catalog: &FontCatalog, dir: &Path) -> Outcome {
    let c = generate_dataset(catalog, &builtin("default").unwrap(), 1000, 7, cores()).unwrap();
    let want = payload_hash(&c);
    let mut pass = true;
    let mut detail = Vec::new();
    for name in ["io.h5", "io.npz"] {
        let path = dir.join(name);
        c.write(&path, None).unwrap();
        let back = DatasetContainer::read(&path).unwrap();
        let again = regenerate(catalog, &back.manifest, cores()).unwrap();
        let equal = back.same_content(&c);
        let regenerated = payload_hash(&again) == want;
        pass &= equal && regenerated;
        detail.push(format!("{name}: read equal {equal}, regenerated hashes equal {regenerated}"));
    }
    outcome(pass, detail.join("; "))
}

fn main() {
    let catalog = FontCatalog::load_with_blacklist_file(Path::new(BUNDLED_FONT_DIR), None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let default_10k = generate_dataset(&catalog, &builtin("default").unwrap(), 10_000, 7, cores()).unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("determinism", Box::new(|| determinism(dir.path()))),
        ("iid split ratios", Box::new(iid_ratios)),
        ("stratified boundary", Box::new(|| stratified(&default_10k))),
        ("compositional hole", Box::new(|| compositional(&catalog))),
        ("camouflage invariance", Box::new(|| camouflage(&catalog))),
        ("corruption rates", Box::new(|| corruption_rates(&catalog))),
        ("cropped border touch", Box::new(|| cropped(&catalog))),
        ("counting scenes", Box::new(|| counting(&catalog))),
        ("few-shot caps", Box::new(|| fewshot(&catalog))),
        ("io round trip", Box::new(|| io_round_trip(&catalog, dir.path()))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let start = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
