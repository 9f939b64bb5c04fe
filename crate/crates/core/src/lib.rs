//! Procedural generator of low-resolution symbol image datasets.

pub mod attributes;
pub mod color;
pub mod corrupt;
pub mod dataset;
pub mod fonts;
pub mod partition;
pub mod recipe;
pub mod render;
pub mod rng;
pub mod scene;
