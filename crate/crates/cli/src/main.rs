use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use synb_core::dataset::{self, DatasetContainer, DatasetError, Format};
use synb_core::fonts::{FontCatalog, FontError, BUNDLED_FONT_DIR};
use synb_core::partition::{
    ks_statistic, split_iid, split_compositional, split_stratified_continuous, split_stratified_discrete,
    PartitionError, PartitionResult, DEFAULT_RATIOS,
};
use synb_core::recipe::{self, RecipeConfig, RecipeError};

mod report;

/// Exit codes.
const EXIT_USAGE: u8 = 2;
const EXIT_FONTS: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_CORRUPT: u8 = 5;

#[derive(Parser)]
#[command(name = "synb", version, about = "Generate synthetic symbol image datasets")]
struct Cli {
    /// Font directory.
    #[arg(long, global = true, env = "SYNB_FONT_DIR", default_value = BUNDLED_FONT_DIR)]
    font_dir: PathBuf,
    /// Blacklist file, one font id per line. Defaults to the bundled list.
    #[arg(long, global = true)]
    blacklist: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset from a built-in recipe or a JSON config.
    Generate(GenerateArgs),
    /// Add a named partition to a dataset.
    Split(SplitArgs),
    /// Summarize a dataset.
    Inspect {
        dataset: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Tile the first samples of a dataset into a PNG.
    Preview {
        dataset: PathBuf,
        #[arg(long, default_value_t = 8)]
        rows: usize,
        #[arg(long, default_value_t = 8)]
        cols: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one sample as PNG plus its JSON record.
    Dump {
        dataset: PathBuf,
        #[arg(long)]
        index: usize,
        /// Output prefix; `.png` and `.json` are appended.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check container invariants, optionally regenerating from the manifest.
    Validate {
        dataset: PathBuf,
        #[arg(long)]
        regenerate: bool,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
    },
    /// List fonts and languages.
    Catalog {
        #[arg(long)]
        json: bool,
    },
    /// Print a built-in recipe as JSON, or list them.
    Recipe { name: Option<String> },
}

#[derive(clap::Args)]
struct GenerateArgs {
    /// Built-in recipe name.
    #[arg(long, conflicts_with = "config")]
    recipe: Option<String>,
    /// JSON recipe file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of samples. Defaults to the config value, then 10000.
    #[arg(long)]
    n: Option<usize>,
    /// Master seed. Required unless the config provides one.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    /// `HxW`, e.g. `64x64`.
    #[arg(long, value_parser = parse_resolution)]
    resolution: Option<[usize; 2]>,
    #[arg(long)]
    language: Option<String>,
    #[arg(long)]
    max_symbols: Option<usize>,
    #[arg(long)]
    max_fonts: Option<usize>,
    /// Attribute override `name=JSON`, e.g. `scale=0.5` or
    /// `translation={"dist":"uniform_pair","params":{"low":-2,"high":2}}`.
    #[arg(long = "set", value_name = "ATTR=JSON")]
    overrides: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Hdf5,
    Npz,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Strategy {
    Iid,
    Stratified,
    Compositional,
}

#[derive(clap::Args)]
struct SplitArgs {
    dataset: PathBuf,
    #[arg(long, value_enum)]
    strategy: Strategy,
    /// Attribute for a stratified split.
    #[arg(long)]
    attr: Option<String>,
    /// Two comma-separated attributes for a compositional split.
    #[arg(long, value_delimiter = ',')]
    attrs: Vec<String>,
    /// Split name. Defaults to the strategy and attributes.
    #[arg(long)]
    name: Option<String>,
    /// Lower percentile for continuous stratified splits.
    #[arg(long, default_value_t = 0.2)]
    lo: f64,
    /// Upper percentile for continuous stratified splits.
    #[arg(long, default_value_t = 0.8)]
    hi: f64,
    /// Three comma-separated ratios for train, valid, test.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    /// Shuffle seed. Defaults to the dataset's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path. Defaults to rewriting the input.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn parse_resolution(s: &str) -> Result<[usize; 2], String> {
    let (h, w) = s.split_once(['x', 'X']).ok_or("expected HxW")?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok([p(h)?, p(w)?])
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(r) = cause.downcast_ref::<RecipeError>() {
            return match r {
                RecipeError::Font(_) => EXIT_FONTS,
                _ => EXIT_USAGE,
            };
        }
        if cause.downcast_ref::<FontError>().is_some() {
            return EXIT_FONTS;
        }
        if let Some(d) = cause.downcast_ref::<DatasetError>() {
            match d {
                DatasetError::Corrupt { .. } => return EXIT_CORRUPT,
                DatasetError::Io { .. } | DatasetError::Write(_) | DatasetError::Preview(_) => return EXIT_IO,
                DatasetError::Recipe(RecipeError::Font(_)) => return EXIT_FONTS,
                DatasetError::Recipe(_) | DatasetError::Partition(_) | DatasetError::UnknownAttribute(_) => {
                    return EXIT_USAGE
                }
                _ => {}
            }
        }
        if cause.downcast_ref::<UsageError>().is_some() || cause.downcast_ref::<PartitionError>().is_some() {
            return EXIT_USAGE;
        }
        if cause.downcast_ref::<CorruptError>().is_some() {
            return EXIT_CORRUPT;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    1
}

#[derive(Debug)]
struct UsageError(String);

#[derive(Debug)]
struct CorruptError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::fmt::Display for CorruptError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
impl std::error::Error for CorruptError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

fn load_catalog(cli: &Cli) -> Result<FontCatalog> {
    Ok(FontCatalog::load_with_blacklist_file(&cli.font_dir, cli.blacklist.as_deref())?)
}

fn read(path: &Path) -> Result<DatasetContainer> {
    DatasetContainer::read(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => generate(&cli, args),
        Command::Split(args) => split(args),
        Command::Inspect { dataset, json } => {
            let c = read(dataset)?;
            let r = report::inspect(&c)?;
            if *json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                print!("{}", report::render_text(&r));
            }
            Ok(())
        }
        Command::Preview { dataset, rows, cols, out } => {
            let c = read(dataset)?;
            dataset::preview(&c, *rows, *cols, out)?;
            let (h, w) = dataset::preview_size(c.height, c.width, *rows, *cols);
            println!("wrote {} ({w}x{h})", out.display());
            Ok(())
        }
        Command::Dump { dataset, index, out } => {
            let c = read(dataset)?;
            dataset::dump_sample(&c, *index, out)?;
            println!("wrote {} and {}", out.with_extension("png").display(), out.with_extension("json").display());
            Ok(())
        }
        Command::Validate { dataset, regenerate, workers } => validate(&cli, dataset, *regenerate, *workers),
        Command::Catalog { json } => {
            let catalog = load_catalog(&cli)?;
            let s = catalog.summary();
            if *json {
                println!("{}", serde_json::to_string_pretty(&s)?);
            } else {
                println!("font dir: {}", s.font_dir.display());
                println!("fonts: {} ({} blacklisted)", s.fonts, s.blacklisted);
                for (lang, n) in &s.languages {
                    println!("  {lang}: {n} fonts");
                }
                for w in s.warnings {
                    println!("warning: {w}");
                }
            }
            Ok(())
        }
        Command::Recipe { name } => {
            match name {
                Some(n) => println!("{}", serde_json::to_string_pretty(&recipe::builtin(n)?.to_json())?),
                None => recipe::RECIPES.iter().for_each(|r| println!("{r}")),
            }
            Ok(())
        }
    }
}

fn resolve_config(args: &GenerateArgs) -> Result<RecipeConfig> {
    let mut config = match (&args.recipe, &args.config) {
        (Some(name), None) => recipe::builtin(name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let json: Json = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            RecipeConfig::from_json(&json)?
        }
        (None, None) => return Err(usage("one of --recipe or --config is required")),
        (Some(_), Some(_)) => unreachable!("clap rejects both"),
    };
    if let Some(n) = args.n {
        config.n_samples = Some(n);
    }
    if let Some(s) = args.seed {
        config.seed = Some(s);
    }
    if let Some(r) = args.resolution {
        config.resolution = r;
    }
    if let Some(l) = &args.language {
        config.languages = recipe::Languages::One(l.clone());
    }
    if args.max_symbols.is_some() {
        config.max_symbols = args.max_symbols;
    }
    if args.max_fonts.is_some() {
        config.max_fonts = args.max_fonts;
    }
    for o in &args.overrides {
        let (attr, value) = o.split_once('=').ok_or_else(|| usage(format!("--set {o}: expected ATTR=JSON")))?;
        let value: Json = serde_json::from_str(value)
            .or_else(|_| serde_json::from_value::<Json>(Json::String(value.to_owned())))
            .map_err(|e| usage(format!("--set {o}: {e}")))?;
        config.overrides.insert(attr.to_owned(), value);
    }
    Ok(config)
}

fn generate(cli: &Cli, args: &GenerateArgs) -> Result<()> {
    let config = resolve_config(args)?;
    let seed = config.seed.ok_or_else(|| usage("a seed is required (--seed or `seed` in the config)"))?;
    let n = config.n_samples.unwrap_or(10_000);
    let format = args.format.map(|f| match f {
        FormatArg::Hdf5 => Format::Hdf5,
        FormatArg::Npz => Format::Npz,
    });
    if Format::from_path(&args.out).is_none() {
        return Err(usage(format!("{}: use a .h5, .hdf5 or .npz extension", args.out.display())));
    }
    let catalog = load_catalog(cli)?;
    let start = std::time::Instant::now();
    let c = dataset::generate_dataset(&catalog, &config, n, seed, args.workers)?;
    let elapsed = start.elapsed();
    c.write(&args.out, format)?;
    let m = &c.manifest;
    println!("wrote {}", args.out.display());
    println!("recipe: {}", m.recipe);
    println!("kind: {:?}", m.kind);
    println!("samples: {}", m.n_samples);
    println!("resolution: {}x{}", c.height, c.width);
    println!("classes: {}", m.classes.len());
    println!("fonts: {}", m.fonts.len());
    println!("seed: {}", m.master_seed);
    println!("splits: {:?}", c.splits.sizes());
    println!("generated in {:.2}s", elapsed.as_secs_f64());
    Ok(())
}

fn split(args: &SplitArgs) -> Result<()> {
    let mut c = read(&args.dataset)?;
    let n = c.len();
    let seed = args.seed.unwrap_or(c.manifest.master_seed);
    let ratios = match &args.ratios {
        Some(r) => match r[..] {
            [a, b, c] => [a, b, c],
            _ => return Err(usage("--ratios needs three values")),
        },
        None => DEFAULT_RATIOS,
    };
    let mut diagnostics = json!({});
    let (result, default_name): (PartitionResult, String) = match args.strategy {
        Strategy::Iid => (split_iid(n, ratios, seed)?, "iid".into()),
        Strategy::Stratified => {
            let attr = args.attr.as_deref().ok_or_else(|| usage("--attr is required for a stratified split"))?;
            let values = c.attribute_values(attr)?;
            let r = if values.iter().all(Json::is_number) {
                let v: Vec<f64> = values.iter().map(|v| v.as_f64().unwrap_or(f64::NAN)).collect();
                split_stratified_continuous(&v, args.lo, 1.0 - args.hi)?
            } else {
                let keys: Vec<String> =
                    values.iter().map(|v| v.as_str().map(str::to_owned).unwrap_or_else(|| v.to_string())).collect();
                split_stratified_discrete(&keys, ratios, seed)?
            };
            (r.with_attributes(&[attr]), format!("stratified_{attr}"))
        }
        Strategy::Compositional => {
            let [a, b] = &args.attrs[..] else {
                return Err(usage("--attrs needs exactly two attributes"));
            };
            let va = c.numeric_attribute(a)?;
            let vb = c.numeric_attribute(b)?;
            let r = split_compositional(&va, &vb)?.with_attributes(&[a, b]);
            for (name, v) in [(a, &va), (b, &vb)] {
                let pick = |idx: &[usize]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
                diagnostics[name] = json!(ks_statistic(&pick(&r.train), &pick(&r.test)));
            }
            (r, format!("compositional_{a}_{b}"))
        }
    };
    let name = args.name.clone().unwrap_or(default_name);
    c.add_split(&name, &result)?;
    if let Some(info) = c.named_splits.get_mut(&name) {
        if diagnostics.as_object().is_some_and(|o| !o.is_empty()) {
            info.info["ks_train_test"] = diagnostics.clone();
        }
    }
    let out = args.out.as_ref().unwrap_or(&args.dataset);
    c.write(out, None)?;
    let [tr, va, te] = result.sizes();
    println!("split {name}: train {tr}, valid {va}, test {te}");
    if let Some(o) = diagnostics.as_object().filter(|o| !o.is_empty()) {
        for (k, v) in o {
            println!("  KS train vs test on {k}: {:.4}", v.as_f64().unwrap_or(f64::NAN));
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn validate(cli: &Cli, path: &Path, regenerate: bool, workers: usize) -> Result<()> {
    let c = read(path)?;
    let classes = c.manifest.classes.len() as i64;
    for name in ["clean", "noisy"] {
        if let Some(l) = c.labels.get(name) {
            if c.manifest.kind == dataset::DatasetKind::Symbols && l.iter().any(|&v| v < 0 || v >= classes) {
                return Err(CorruptError(format!("labels/{name} holds a value outside 0..{classes}")).into());
            }
        }
    }
    for (name, s) in std::iter::once(("default", &c.splits)).chain(c.named_splits.iter().map(|(k, v)| (k.as_str(), v))) {
        let total: usize = s.sizes().iter().sum();
        let mut seen = vec![false; c.len()];
        for (_, idx) in s.sets() {
            for &i in idx {
                if std::mem::replace(&mut seen[i as usize], true) {
                    return Err(CorruptError(format!("split {name} repeats index {i}")).into());
                }
            }
        }
        if total != c.len() {
            return Err(CorruptError(format!("split {name} covers {total} of {} samples", c.len())).into());
        }
    }
    println!("{}: {} samples, container invariants hold", path.display(), c.len());
    if regenerate {
        let catalog = load_catalog(cli)?;
        let again = dataset::regenerate(&catalog, &c.manifest, workers)?;
        if !again.same_payload(&c) {
            return Err(CorruptError("payload differs from a regeneration of its manifest".into()).into());
        }
        println!("regenerated payload matches");
    }
    Ok(())
}
