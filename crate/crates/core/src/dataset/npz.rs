//! NumPy `.npz` layout. Strings are stored as UTF-8 byte buffers:
//! `attributes` holds the concatenated records, `attribute_offsets` their
//! N + 1 boundaries, and `manifest` and every `splits/.../info` hold one
//! JSON document each.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use ndarray::{ArrayD, ArrayViewD, IxDyn};
use ndarray_npy::{NpzReader, NpzWriter, ReadableElement, WritableElement};
use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime};

use super::{DatasetContainer, DatasetError, Instances, Manifest, SplitSets};

struct Writer<'p> {
    npz: NpzWriter<BufWriter<File>>,
    path: &'p Path,
}

impl Writer<'_> {
    fn put<T: WritableElement>(&mut self, name: &str, shape: &[usize], data: &[T]) -> Result<(), DatasetError> {
        let view = ArrayViewD::from_shape(IxDyn(shape), data).expect("shape matches data");
        self.npz
            .add_array(name, &view)
            .map_err(|e| DatasetError::Write(format!("{}: {name}: {e}", self.path.display())))
    }

    fn put_text(&mut self, name: &str, text: &str) -> Result<(), DatasetError> {
        self.put(name, &[text.len()], text.as_bytes())
    }

    fn put_split(&mut self, prefix: &str, s: &SplitSets) -> Result<(), DatasetError> {
        for (name, idx) in s.sets() {
            self.put(&format!("{prefix}/{name}"), &[idx.len()], idx)?;
        }
        self.put_text(&format!("{prefix}/info"), &s.info.to_string())
    }
}

pub(super) fn write(c: &DatasetContainer, path: &Path) -> Result<(), DatasetError> {
    let file = File::create(path).map_err(|source| DatasetError::Io { path: path.into(), source })?;
    let large = c.images.len() as u64 >= u64::from(u32::MAX) / 2;
    let options = SimpleFileOptions::default()
        .compression_method(CompressionMethod::Stored)
        .last_modified_time(DateTime::default())
        .large_file(large);
    let mut w = Writer { npz: NpzWriter::new_with_options(BufWriter::new(file), options), path };
    let (n, h, wd) = (c.len(), c.height, c.width);
    w.put("images", &[n, h, wd, 3], &c.images)?;
    w.put("masks", &[n, h, wd], &c.masks)?;
    let mut offsets = Vec::with_capacity(n + 1);
    let mut text = String::new();
    offsets.push(0u64);
    for a in &c.attributes {
        text.push_str(a);
        offsets.push(text.len() as u64);
    }
    w.put_text("attributes", &text)?;
    w.put("attribute_offsets", &[n + 1], &offsets)?;
    for (name, l) in &c.labels {
        w.put(&format!("labels/{name}"), &[n], l)?;
    }
    w.put_split("splits", &c.splits)?;
    for (name, s) in &c.named_splits {
        w.put_split(&format!("splits/{name}"), s)?;
    }
    if let Some(inst) = &c.instances {
        let m = inst.offsets.last().copied().unwrap_or(0) as usize;
        w.put("instance_ids", &[n, h, wd], &inst.ids)?;
        w.put("instance_masks", &[m, h, wd], &inst.masks)?;
        w.put("instance_offsets", &[n + 1], &inst.offsets)?;
    }
    w.put_text("manifest", &serde_json::to_string(&c.manifest).expect("serializable"))?;
    w.npz.finish().map_err(|e| DatasetError::Write(format!("{}: {e}", path.display())))?;
    Ok(())
}

struct Reader<'p> {
    npz: NpzReader<File>,
    path: &'p Path,
}

impl Reader<'_> {
    fn corrupt(&self, message: String) -> DatasetError {
        DatasetError::Corrupt { path: self.path.into(), message }
    }

    fn get<T: ReadableElement + Clone>(&mut self, name: &str) -> Result<(Vec<usize>, Vec<T>), DatasetError> {
        let a: ArrayD<T> = self.npz.by_name(name).map_err(|e| self.corrupt(format!("{name}: {e}")))?;
        let shape = a.shape().to_vec();
        let data = if a.is_standard_layout() {
            a.into_raw_vec_and_offset().0
        } else {
            a.iter().cloned().collect()
        };
        Ok((shape, data))
    }

    fn get_text(&mut self, name: &str) -> Result<String, DatasetError> {
        let bytes = self.get::<u8>(name)?.1;
        String::from_utf8(bytes).map_err(|e| self.corrupt(format!("{name}: {e}")))
    }

    fn get_split(&mut self, prefix: &str) -> Result<SplitSets, DatasetError> {
        Ok(SplitSets {
            train: self.get(&format!("{prefix}/train"))?.1,
            valid: self.get(&format!("{prefix}/valid"))?.1,
            test: self.get(&format!("{prefix}/test"))?.1,
            info: serde_json::from_str(&self.get_text(&format!("{prefix}/info"))?)
                .map_err(|e| self.corrupt(format!("{prefix}/info: {e}")))?,
        })
    }
}

pub(super) fn read(path: &Path) -> Result<DatasetContainer, DatasetError> {
    let file = File::open(path).map_err(|source| DatasetError::Io { path: path.into(), source })?;
    let npz = NpzReader::new(file)
        .map_err(|e| DatasetError::Corrupt { path: path.into(), message: e.to_string() })?;
    let mut r = Reader { npz, path };
    let names = r.npz.names().map_err(|e| r.corrupt(e.to_string()))?;
    let (shape, images) = r.get::<u8>("images")?;
    let [n, h, w, 3] = shape[..] else {
        return Err(r.corrupt(format!("images have shape {shape:?}")));
    };
    let masks = r.get::<u8>("masks")?.1;
    let text = r.get_text("attributes")?;
    let offsets = r.get::<u64>("attribute_offsets")?.1;
    if offsets.len() != n + 1 {
        return Err(r.corrupt(format!("{} attribute offsets for {n} images", offsets.len())));
    }
    let mut attributes = Vec::with_capacity(n);
    for win in offsets.windows(2) {
        let s = text
            .get(win[0] as usize..win[1] as usize)
            .ok_or_else(|| r.corrupt("attribute offsets out of range".into()))?;
        attributes.push(s.to_owned());
    }
    let mut labels = BTreeMap::new();
    for name in names.iter().filter_map(|s| s.strip_prefix("labels/")) {
        labels.insert(name.to_owned(), r.get::<i64>(&format!("labels/{name}"))?.1);
    }
    let splits = r.get_split("splits")?;
    let mut named_splits = BTreeMap::new();
    for name in names.iter().filter_map(|s| s.strip_prefix("splits/")?.strip_suffix("/info")) {
        named_splits.insert(name.to_owned(), r.get_split(&format!("splits/{name}"))?);
    }
    let instances = if names.iter().any(|s| s == "instance_ids") {
        Some(Instances {
            ids: r.get("instance_ids")?.1,
            masks: r.get("instance_masks")?.1,
            offsets: r.get("instance_offsets")?.1,
        })
    } else {
        None
    };
    let manifest: Manifest =
        serde_json::from_str(&r.get_text("manifest")?).map_err(|e| r.corrupt(format!("manifest: {e}")))?;
    Ok(DatasetContainer { height: h, width: w, images, masks, attributes, labels, instances, splits, named_splits, manifest })
}
