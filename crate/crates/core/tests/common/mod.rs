#![allow(dead_code)]

pub mod oracles;

use std::path::Path;
use std::sync::OnceLock;

use synb_core::fonts::{FontCatalog, BUNDLED_FONT_DIR};

pub fn catalog() -> &'static FontCatalog {
    static CATALOG: OnceLock<FontCatalog> = OnceLock::new();
    CATALOG.get_or_init(|| FontCatalog::load_with_blacklist_file(Path::new(BUNDLED_FONT_DIR), None).unwrap())
}

/// Count of symbol pixels (mask >= 128).
pub fn symbol_pixels(mask: &[u8]) -> usize {
    mask.iter().filter(|&&m| m >= 128).count()
}
