mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use proptest::prelude::*;
use synb_core::fonts::{FontCatalog, FontError, BUNDLED_FONT_DIR, MIN_FONTS_PER_LANGUAGE};
use synb_core::render::{fill_polygons, place_outline};

use common::{catalog, symbol_pixels};

const THREE: [&str; 3] = ["Arimo_400Regular.ttf", "Tinos_400Regular.ttf", "Rubik_400Regular.ttf"];

fn copy_fonts(dir: &Path, files: &[(&str, String)]) {
    for (src, dst) in files {
        fs::copy(Path::new(BUNDLED_FONT_DIR).join(src), dir.join(dst)).unwrap();
    }
}

#[test]
fn three_fonts_no_blacklist() {
    let dir = tempfile::tempdir().unwrap();
    copy_fonts(dir.path(), &THREE.map(|f| (f, f.to_owned())));
    let cat = FontCatalog::load(dir.path(), &BTreeSet::new()).unwrap();
    assert_eq!(cat.len(), 3);
    assert_eq!(cat.records().iter().filter(|r| r.blacklisted).count(), 0);
}

#[test]
fn blacklist_flags_without_dropping() {
    let dir = tempfile::tempdir().unwrap();
    copy_fonts(dir.path(), &THREE.map(|f| (f, f.to_owned())));
    let first = FontCatalog::load(dir.path(), &BTreeSet::new()).unwrap().records()[0].id.clone();
    let list = dir.path().join("blacklist.txt");
    fs::write(&list, format!("# comment\n{first}\n")).unwrap();
    let cat = FontCatalog::load_with_blacklist_file(dir.path(), Some(&list)).unwrap();
    assert_eq!(cat.len(), 3);
    assert_eq!(cat.records().iter().filter(|r| r.blacklisted).count(), 1);
    assert_eq!(cat.eligible().count(), 2);
    assert!(cat.eligible().all(|r| r.id != first));
}

#[test]
fn unparseable_files_are_warnings() {
    let dir = tempfile::tempdir().unwrap();
    copy_fonts(dir.path(), &[(THREE[0], THREE[0].to_owned())]);
    fs::write(dir.path().join("broken.ttf"), b"not a font").unwrap();
    let cat = FontCatalog::load(dir.path(), &BTreeSet::new()).unwrap();
    assert_eq!(cat.len(), 1);
    assert_eq!(cat.warnings().len(), 1);
}

#[test]
fn load_errors() {
    let missing = FontCatalog::load(Path::new("/nonexistent/fonts"), &BTreeSet::new());
    assert!(matches!(missing, Err(FontError::MissingDirectory(_))));
    let empty = tempfile::tempdir().unwrap();
    assert!(matches!(FontCatalog::load(empty.path(), &BTreeSet::new()), Err(FontError::NoFonts(_))));
}

#[test]
fn loading_is_order_independent() {
    let names: Vec<String> = fs::read_dir(BUNDLED_FONT_DIR)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".ttf"))
        .collect();
    let strip = |cat: &FontCatalog| {
        cat.records()
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.path = Default::default();
                r
            })
            .collect::<Vec<_>>()
    };
    let reference = strip(catalog());
    // Renaming the files changes the directory enumeration order.
    let dir = tempfile::tempdir().unwrap();
    let n = names.len();
    let renamed: Vec<(&str, String)> =
        names.iter().enumerate().map(|(i, f)| (f.as_str(), format!("{:03}_{f}", n - i))).collect();
    copy_fonts(dir.path(), &renamed);
    let shuffled = FontCatalog::load(dir.path(), &synb_core::fonts::parse_blacklist(synb_core::fonts::DEFAULT_BLACKLIST))
        .unwrap();
    assert_eq!(strip(&shuffled), reference);
}

#[test]
fn ids_are_unique() {
    let ids: BTreeSet<&str> = catalog().records().iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids.len(), catalog().len());
}

#[test]
fn english_alphabet() {
    let a = catalog().alphabet("english", None, None).unwrap();
    assert_eq!(a.codepoints, ('a'..='z').collect::<Vec<_>>());
    let five = catalog().alphabet("english", Some(5), None).unwrap();
    assert_eq!(five.codepoints, vec!['a', 'b', 'c', 'd', 'e']);
}

#[test]
fn korean_first_thousand() {
    let a = catalog().alphabet("korean", Some(1000), None).unwrap();
    assert_eq!(a.codepoints.len(), 1000);
    let expected: Vec<char> = (0xAC00u32..0xAC00 + 1000).map(|u| char::from_u32(u).unwrap()).collect();
    assert_eq!(a.codepoints, expected);
    assert!(a.fonts.len() >= MIN_FONTS_PER_LANGUAGE);
}

#[test]
fn unknown_and_thin_languages() {
    assert!(matches!(catalog().alphabet("klingon", None, None), Err(FontError::UnknownLanguage(_))));
    // The bundled corpus covers only the first Hangul syllables.
    assert!(matches!(catalog().alphabet("korean", None, None), Err(FontError::LanguageExcluded { .. })));
}

#[test]
fn font_cap_takes_first_ids() {
    let all = catalog().alphabet("english", None, None).unwrap();
    let capped = catalog().alphabet("english", None, Some(3)).unwrap();
    assert_eq!(capped.fonts, all.fonts[..3]);
    let mut sorted = all.fonts.clone();
    sorted.sort();
    assert_eq!(sorted, all.fonts);
}

#[test]
fn every_advertised_pair_renders() {
    for lang in ["english", "korean"] {
        let cap = (lang == "korean").then_some(1000);
        let a = catalog().alphabet(lang, cap, None).unwrap();
        for font in &a.fonts {
            for &c in &a.codepoints {
                let g = catalog().glyph_outline(font, c, false, false).unwrap();
                let placed = place_outline(&g.outline, &g.bbox, 0.7, 0.0, [0.0, 0.0], 32, 32);
                let mask = fill_polygons(&placed.contours, 32, 32).to_mask();
                assert!(mask.iter().any(|&m| m > 0), "{font} {c:?} renders empty");
            }
        }
    }
}

#[test]
fn glyph_outline_is_deterministic() {
    let font = &catalog().alphabet("english", None, None).unwrap().fonts[0];
    let a = catalog().glyph_outline(font, 'a', false, false).unwrap();
    let b = catalog().glyph_outline(font, 'a', false, false).unwrap();
    assert_eq!(a.outline, b.outline);
    assert!(!a.outline.is_empty());
    assert!(a.bbox.area() > 0.0);
}

/// Ink of a glyph rendered at 128 px, positioned by the regular glyph's box
/// so both styles share one scale.
fn ink(font: &str, c: char, bold: bool) -> usize {
    let regular = catalog().glyph_outline(font, c, false, false).unwrap();
    let g = catalog().glyph_outline(font, c, bold, false).unwrap();
    let placed = place_outline(&g.outline, &regular.bbox, 0.7, 0.0, [0.0, 0.0], 128, 128);
    symbol_pixels(&fill_polygons(&placed.contours, 128, 128).to_mask())
}

#[test]
fn bold_has_more_ink() {
    let a = catalog().alphabet("english", None, None).unwrap();
    for font in &a.fonts {
        let rec = catalog().get(font).unwrap();
        if !rec.supports_bold || rec.is_bold {
            continue;
        }
        for &c in &a.codepoints {
            let (r, b) = (ink(font, c, false), ink(font, c, true));
            assert!(b >= r, "{font} {c:?}: bold {b} < regular {r}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn capped_alphabets_are_prefixes(k in 1usize..=26) {
        let full = catalog().alphabet("english", None, None).unwrap();
        let capped = catalog().alphabet("english", Some(k), None).unwrap();
        prop_assert_eq!(&capped.codepoints[..], &full.codepoints[..k]);
    }

    #[test]
    fn korean_caps_are_prefixes(k in 1usize..=1000) {
        let full = catalog().alphabet("korean", Some(1000), None).unwrap();
        let capped = catalog().alphabet("korean", Some(k), None).unwrap();
        prop_assert_eq!(&capped.codepoints[..], &full.codepoints[..k]);
    }
}
