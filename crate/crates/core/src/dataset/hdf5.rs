use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use hdf5::types::VarLenUnicode;
use hdf5::{File, Group, H5Type};

use super::{DatasetContainer, DatasetError, Instances, Manifest, SplitSets};

const SPLIT_SETS: [&str; 3] = ["train", "valid", "test"];

fn werr(path: &Path) -> impl Fn(hdf5::Error) -> DatasetError + '_ {
    move |e| DatasetError::Write(format!("{}: {e}", path.display()))
}

fn put<T: H5Type>(g: &Group, name: &str, shape: &[usize], data: &[T]) -> hdf5::Result<()> {
    let ds = g.new_dataset::<T>().shape(shape).no_chunk().obj_track_times(false).create(name)?;
    if !data.is_empty() {
        ds.write_raw(data)?;
    }
    Ok(())
}

fn put_split(g: &Group, s: &SplitSets) -> hdf5::Result<()> {
    for (name, idx) in s.sets() {
        put(g, name, &[idx.len()], idx)?;
    }
    let info = VarLenUnicode::from_str(&s.info.to_string()).expect("JSON has no NUL");
    g.new_attr::<VarLenUnicode>().create("info")?.write_scalar(&info)
}

pub(super) fn write(c: &DatasetContainer, path: &Path) -> Result<(), DatasetError> {
    let e = werr(path);
    let file = File::with_options().with_fcpl(|p| p.obj_track_times(false)).create(path).map_err(&e)?;
    let root: &Group = &file;
    let (n, h, w) = (c.len(), c.height, c.width);
    put(root, "images", &[n, h, w, 3], &c.images).map_err(&e)?;
    put(root, "masks", &[n, h, w], &c.masks).map_err(&e)?;
    let attrs: Vec<VarLenUnicode> =
        c.attributes.iter().map(|s| VarLenUnicode::from_str(s).expect("JSON has no NUL")).collect();
    put(root, "attributes", &[n], &attrs).map_err(&e)?;
    let labels = file.create_group("labels").map_err(&e)?;
    for (name, l) in &c.labels {
        put(&labels, name, &[n], l).map_err(&e)?;
    }
    let splits = file.create_group("splits").map_err(&e)?;
    put_split(&splits, &c.splits).map_err(&e)?;
    for (name, s) in &c.named_splits {
        let g = splits.create_group(name).map_err(&e)?;
        put_split(&g, s).map_err(&e)?;
    }
    if let Some(inst) = &c.instances {
        put(root, "instance_ids", &[n, h, w], &inst.ids).map_err(&e)?;
        let m = inst.offsets.last().copied().unwrap_or(0) as usize;
        put(root, "instance_masks", &[m, h, w], &inst.masks).map_err(&e)?;
        put(root, "instance_offsets", &[n + 1], &inst.offsets).map_err(&e)?;
    }
    let manifest = serde_json::to_string(&c.manifest).expect("serializable");
    file.new_attr::<VarLenUnicode>()
        .create("manifest")
        .and_then(|a| a.write_scalar(&VarLenUnicode::from_str(&manifest).expect("JSON has no NUL")))
        .map_err(&e)?;
    file.close().map_err(&e)
}

fn get<T: H5Type>(g: &Group, name: &str) -> hdf5::Result<(Vec<usize>, Vec<T>)> {
    let ds = g.dataset(name)?;
    let shape = ds.shape();
    let data = if shape.iter().product::<usize>() == 0 { Vec::new() } else { ds.read_raw::<T>()? };
    Ok((shape, data))
}

fn get_split(g: &Group) -> hdf5::Result<SplitSets> {
    let info: VarLenUnicode = g.attr("info")?.read_scalar()?;
    Ok(SplitSets {
        train: get(g, "train")?.1,
        valid: get(g, "valid")?.1,
        test: get(g, "test")?.1,
        info: serde_json::from_str(info.as_str()).unwrap_or(serde_json::Value::Null),
    })
}

pub(super) fn read(path: &Path) -> Result<DatasetContainer, DatasetError> {
    let corrupt = |m: String| DatasetError::Corrupt { path: path.into(), message: m };
    let e = |err: hdf5::Error| corrupt(err.to_string());
    let file = File::open(path).map_err(e)?;
    let root: &Group = &file;
    let (shape, images) = get::<u8>(root, "images").map_err(e)?;
    let [n, h, w, 3] = shape[..] else {
        return Err(corrupt(format!("images have shape {shape:?}")));
    };
    let masks = get::<u8>(root, "masks").map_err(e)?.1;
    let attributes: Vec<String> =
        get::<VarLenUnicode>(root, "attributes").map_err(e)?.1.into_iter().map(|s| s.to_string()).collect();
    let mut labels = BTreeMap::new();
    let lg = file.group("labels").map_err(e)?;
    for name in lg.member_names().map_err(e)? {
        labels.insert(name.clone(), get::<i64>(&lg, &name).map_err(e)?.1);
    }
    let sg = file.group("splits").map_err(e)?;
    let splits = get_split(&sg).map_err(e)?;
    let mut named_splits = BTreeMap::new();
    for name in sg.member_names().map_err(e)? {
        if SPLIT_SETS.contains(&name.as_str()) {
            continue;
        }
        named_splits.insert(name.clone(), get_split(&sg.group(&name).map_err(e)?).map_err(e)?);
    }
    let instances = if file.link_exists("instance_ids") {
        Some(Instances {
            ids: get(root, "instance_ids").map_err(e)?.1,
            masks: get(root, "instance_masks").map_err(e)?.1,
            offsets: get(root, "instance_offsets").map_err(e)?.1,
        })
    } else {
        None
    };
    let manifest: VarLenUnicode = file.attr("manifest").and_then(|a| a.read_scalar()).map_err(e)?;
    let manifest: Manifest =
        serde_json::from_str(manifest.as_str()).map_err(|err| corrupt(format!("manifest: {err}")))?;
    if attributes.len() != n {
        return Err(corrupt(format!("{} attribute records for {n} images", attributes.len())));
    }
    Ok(DatasetContainer {
        height: h,
        width: w,
        images,
        masks,
        attributes,
        labels,
        instances,
        splits,
        named_splits,
        manifest,
    })
}
