//! The `tigranet` command line: `train`, `eval`, `inspect` and `gradcheck`.
//!
//! Every option can also come from a `--config` file of `key = value` lines
//! using the long flag names (`#` starts a comment). Flags override the
//! file. `TIGRA_DATA_DIR` is consulted when neither supplies `data-dir`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::data::{
    load_mnist_dir, make_mnist012, make_variant, transform_dataset, write_manifest, Splits,
    TransformKind, Variant,
};
use crate::error::{Error, Result};
use crate::graph::GridGraph;
use crate::network::{
    forward, load_checkpoint, parse_architecture_inferred, save_checkpoint, Checkpoint, LayerSpec,
    NetworkTape,
};
use crate::optim::{evaluate, gradcheck, train, TrainConfig};
use crate::rng::SplitMix64;
use crate::spectral::spectral_response;

pub const DATA_DIR_ENV: &str = "TIGRA_DATA_DIR";
pub const DEFAULT_GRADCHECK_ARCH: &str = "SC[2,2]-DP[8]-SC[2,2]-DP[6]-S[3]-FC[6]-FC[3]";
pub const RESPONSE_SAMPLES: usize = 256;

#[derive(Debug, Parser)]
#[command(
    name = "tigranet",
    version,
    about = "Graph-based isometry-invariant image classifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a network and write checkpoint.tig, metrics.csv and config.txt.
    Train(TrainArgs),
    /// Accuracy of a checkpoint on plain and transformed test images.
    Eval(EvalArgs),
    /// Dump filter spectra and, with --input, feature maps as CSV.
    Inspect(InspectArgs),
    /// Compare analytic gradients with central differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// `key = value` file supplying defaults for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (1 gives a strictly sequential run).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// mnist012, mnist-rot or mnist-trans.
    #[arg(long)]
    dataset: Option<String>,
    /// Directory holding train-images-idx3-ubyte and train-labels-idx1-ubyte.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Split sizes `train,val,test`, or one number for all three.
    #[arg(long)]
    subsample: Option<String>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    /// Architecture string, e.g. "SC[3,3]-DP[300]-S[4]-FC[10]".
    #[arg(long)]
    arch: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Number of independently sampled transformed test sets.
    #[arg(long)]
    repeats: Option<usize>,
    /// Split scored without transforms: train, val or test.
    #[arg(long)]
    split: Option<String>,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Text file of pixel values (whitespace or comma separated, row-major).
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GradcheckArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    arch: Option<String>,
    /// Grid size as `HxW`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    tolerance: Option<f64>,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

const CONFIG_KEYS: &[&str] = &[
    "arch",
    "dataset",
    "data-dir",
    "out",
    "seed",
    "epochs",
    "batch",
    "lr",
    "repeats",
    "subsample",
    "threads",
    "tolerance",
    "checkpoint",
    "input",
    "split",
    "grid",
];

/// Flag values merged with the config file; records what was resolved.
struct Resolved {
    file: BTreeMap<String, String>,
    echo: BTreeMap<String, String>,
}

impl Resolved {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let mut file = BTreeMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            for (n, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    Failure::Usage(format!(
                        "{}:{}: expected `key = value`",
                        path.display(),
                        n + 1
                    ))
                })?;
                let k = k.trim().replace('_', "-");
                if !CONFIG_KEYS.contains(&k.as_str()) {
                    return Err(Failure::Usage(format!(
                        "{}:{}: unknown key `{k}`",
                        path.display(),
                        n + 1
                    )));
                }
                file.insert(k, v.trim().to_string());
            }
        }
        Ok(Self {
            file,
            echo: BTreeMap::new(),
        })
    }

    fn get<T: FromStr + ToString>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>> {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(raw) => Some(raw.parse::<T>().map_err(|_| {
                    Failure::Usage(format!("config value `{raw}` is not valid for `{key}`"))
                })?),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.echo.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    fn or<T: FromStr + ToString>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> CliResult<T> {
        let v = self.get(key, flag)?.unwrap_or(default);
        self.echo.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    fn required<T: FromStr + ToString>(&mut self, key: &str, flag: Option<T>) -> CliResult<T> {
        self.get(key, flag)?
            .ok_or_else(|| Failure::Usage(format!("missing required option --{key}")))
    }

    fn path(&mut self, key: &str, flag: Option<PathBuf>) -> CliResult<Option<PathBuf>> {
        Ok(self
            .get(key, flag.map(|p| p.display().to_string()))?
            .map(PathBuf::from))
    }

    fn echo_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.echo {
            writeln!(out, "{k} = {v}").expect("write to String");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DatasetKind {
    Mnist012,
    Variant(Variant),
}

impl DatasetKind {
    fn parse(s: &str) -> CliResult<Self> {
        match s {
            "mnist012" => Ok(DatasetKind::Mnist012),
            "mnist-rot" => Ok(DatasetKind::Variant(Variant::Rot)),
            "mnist-trans" => Ok(DatasetKind::Variant(Variant::Trans)),
            other => Err(Failure::Usage(format!(
                "unknown dataset `{other}` (expected mnist012, mnist-rot or mnist-trans)"
            ))),
        }
    }

    fn transformed_label(self) -> &'static str {
        match self {
            DatasetKind::Variant(Variant::Trans) => "translated",
            _ => "rotated",
        }
    }

    fn transform(self) -> TransformKind {
        match self {
            DatasetKind::Mnist012 => TransformKind::Rotate,
            DatasetKind::Variant(v) => v.transform(),
        }
    }
}

fn parse_subsample(s: &str) -> CliResult<(usize, usize, usize)> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("bad --subsample `{s}`")))?;
    match parts[..] {
        [n] => Ok((n, n, n)),
        [a, b, c] => Ok((a, b, c)),
        _ => Err(Failure::Usage(format!(
            "--subsample takes one or three numbers, got `{s}`"
        ))),
    }
}

struct DataChoice {
    kind: DatasetKind,
    dir: PathBuf,
    subsample: Option<(usize, usize, usize)>,
}

fn resolve_data(r: &mut Resolved, args: DataArgs) -> CliResult<DataChoice> {
    let kind = DatasetKind::parse(&r.or("dataset", args.dataset, "mnist012".to_string())?)?;
    let dir = match r.path("data-dir", args.data_dir)? {
        Some(d) => d,
        None => match std::env::var_os(DATA_DIR_ENV) {
            Some(d) => {
                r.echo
                    .insert("data-dir".into(), PathBuf::from(&d).display().to_string());
                PathBuf::from(d)
            }
            None => {
                return Err(Failure::Usage(format!(
                    "no --data-dir given and {DATA_DIR_ENV} is unset"
                )))
            }
        },
    };
    let subsample = r
        .get("subsample", args.subsample)?
        .map(|s| parse_subsample(&s))
        .transpose()?;
    Ok(DataChoice {
        kind,
        dir,
        subsample,
    })
}

fn build_splits(choice: &DataChoice, seed: u64) -> Result<Splits> {
    let source = load_mnist_dir(&choice.dir)?;
    match choice.kind {
        DatasetKind::Mnist012 => {
            let s = make_mnist012(&source, seed)?;
            Ok(match choice.subsample {
                Some(cap) => s.capped(cap),
                None => s,
            })
        }
        DatasetKind::Variant(v) => make_variant(&source, v, seed, choice.subsample),
    }
}

fn canvas(kind: DatasetKind, source: (usize, usize)) -> (usize, usize) {
    match kind {
        DatasetKind::Mnist012 => source,
        DatasetKind::Variant(v) => v.canvas(),
    }
}

fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> CliResult<T> + Send,
) -> CliResult<T> {
    match threads {
        None => f(),
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Runtime(Error::InvalidArgument(format!("thread pool: {e}"))))?
            .install(f),
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn cmd_train(args: TrainArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut r = Resolved::load(args.common.config.as_deref())?;
    let arch = r.required("arch", args.arch)?;
    let out_dir = r
        .path("out", args.out)?
        .ok_or_else(|| Failure::Usage("missing required option --out".into()))?;
    let data = resolve_data(&mut r, args.data)?;
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        seed: r.or("seed", args.common.seed, defaults.seed)?,
        epochs: r.or("epochs", args.epochs, defaults.epochs)?,
        batch_size: r.or("batch", args.batch, defaults.batch_size)?,
        lr: r.or("lr", args.lr, defaults.lr)?,
        ..defaults
    };
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let threads = r.get("threads", args.common.threads)?;
    // Catch syntax errors before touching the data; the canvas comes later.
    parse_architecture_inferred(&arch, (1, 2)).map_err(|e| Failure::Usage(e.to_string()))?;

    let splits = build_splits(&data, config.seed)?;
    let input = canvas(data.kind, (splits.train.height, splits.train.width));
    let spec =
        parse_architecture_inferred(&arch, input).map_err(|e| Failure::Usage(e.to_string()))?;
    r.echo.insert("arch".into(), spec.to_string());

    create_dir(&out_dir)?;
    write_file(&out_dir.join("config.txt"), r.echo_text())?;
    write_manifest(&out_dir, &splits)?;

    let (ckpt, mut metrics) = with_threads(threads, || {
        let (ckpt, mut metrics) = train(&spec, &config, &splits.train, &splits.val)?;
        if !splits.test.is_empty() {
            metrics.test_acc = Some(evaluate(&ckpt, &splits.test)?.accuracy);
            metrics.transformed_test_acc =
                Some(evaluate(&ckpt, &splits.test_transformed)?.accuracy);
        }
        Ok((ckpt, metrics))
    })?;
    metrics.best_epoch = ckpt.epoch as usize;
    save_checkpoint(out_dir.join("checkpoint.tig"), &ckpt)?;
    write_file(&out_dir.join("metrics.csv"), metrics.to_csv())?;

    let last = metrics.epochs.last().expect("at least one epoch");
    let _ = writeln!(out, "train_acc {:.6}", last.train_acc);
    if let Some(v) = metrics.best_val_acc {
        let _ = writeln!(out, "best_val_acc {v:.6} (epoch {})", metrics.best_epoch);
    }
    if let Some(t) = metrics.test_acc {
        let _ = writeln!(out, "test_acc {t:.6}");
    }
    if let Some(t) = metrics.transformed_test_acc {
        let _ = writeln!(out, "{}_test_acc {t:.6}", data.kind.transformed_label());
    }
    let _ = writeln!(out, "wrote {}", out_dir.display());
    Ok(())
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn cmd_eval(args: EvalArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut r = Resolved::load(args.common.config.as_deref())?;
    let path = r
        .path("checkpoint", args.checkpoint)?
        .ok_or_else(|| Failure::Usage("missing required option --checkpoint".into()))?;
    let data = resolve_data(&mut r, args.data)?;
    let repeats = r.or("repeats", args.repeats, 1)?;
    if repeats == 0 {
        return Err(Failure::Usage("--repeats must be at least 1".into()));
    }
    let split = r.or("split", args.split, "test".to_string())?;
    if !["train", "val", "test"].contains(&split.as_str()) {
        return Err(Failure::Usage(format!("unknown split `{split}`")));
    }
    let seed_flag = r.get("seed", args.common.seed)?;
    let threads = r.get("threads", args.common.threads)?;

    let ckpt = load_checkpoint(&path)?;
    let seed = seed_flag.unwrap_or(ckpt.seed);
    let splits = build_splits(&data, seed)?;
    let plain = match split.as_str() {
        "train" => &splits.train,
        "val" => &splits.val,
        _ => &splits.test,
    };
    let (acc, transformed) = with_threads(threads, || {
        let acc = evaluate(&ckpt, plain)?.accuracy;
        let mut transformed = Vec::with_capacity(repeats);
        for rep in 0..repeats {
            let t_seed = SplitMix64::derive(seed, 1000 + rep as u64).next_u64();
            let (ds, _) = transform_dataset(&splits.test, data.kind.transform(), t_seed)?;
            transformed.push(evaluate(&ckpt, &ds)?.accuracy);
        }
        Ok((acc, transformed))
    })?;
    let _ = writeln!(out, "{split}_acc {acc:.6}");
    let (mean, std) = mean_std(&transformed);
    let label = data.kind.transformed_label();
    let _ = writeln!(out, "{label}_test_acc_mean {mean:.6}");
    let _ = writeln!(out, "{label}_test_acc_std {std:.6}");
    Ok(())
}

fn read_image(path: &Path, ckpt: &Checkpoint) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let values = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>().map_err(|_| {
                Error::InvalidArgument(format!("{}: `{t}` is not a number", path.display()))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != ckpt.spec.num_vertices() {
        return Err(Error::Shape(format!(
            "{} holds {} values, the network expects {}x{}",
            path.display(),
            values.len(),
            ckpt.spec.height,
            ckpt.spec.width
        )));
    }
    Ok(values)
}

fn cmd_inspect(args: InspectArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut r = Resolved::load(args.common.config.as_deref())?;
    let path = r
        .path("checkpoint", args.checkpoint)?
        .ok_or_else(|| Failure::Usage("missing required option --checkpoint".into()))?;
    let out_dir = r
        .path("out", args.out)?
        .ok_or_else(|| Failure::Usage("missing required option --out".into()))?;
    let input = r.path("input", args.input)?;

    let ckpt = load_checkpoint(&path)?;
    create_dir(&out_dir)?;
    let mut written = 0;
    for (layer, conv) in ckpt.params.conv.iter().enumerate() {
        for k in 0..conv.filters {
            let mut csv = String::from("lambda,response\n");
            for (lambda, h) in spectral_response(&conv.filter(k), RESPONSE_SAMPLES)? {
                writeln!(csv, "{lambda:.16e},{h:.16e}").expect("write to String");
            }
            write_file(&out_dir.join(format!("response_sc{layer}_f{k}.csv")), csv)?;
            written += 1;
        }
    }
    if let Some(img_path) = input {
        let img = read_image(&img_path, &ckpt)?;
        let l = GridGraph::new(ckpt.spec.height, ckpt.spec.width)?.laplacian()?;
        let mut tape = NetworkTape::default();
        let probs = forward(&ckpt.spec, &ckpt.params, &l, &img, &mut tape)?;
        for (pos, (layer, maps)) in tape.feature_maps().iter().enumerate() {
            let tag = match layer {
                LayerSpec::Conv { .. } => "sc",
                _ => "dp",
            };
            for (k, map) in maps.iter().enumerate() {
                let mut csv = String::from("vertex,value\n");
                for (v, x) in map.iter().enumerate() {
                    writeln!(csv, "{v},{x:.16e}").expect("write to String");
                }
                write_file(
                    &out_dir.join(format!("features_{pos}_{tag}_map{k}.csv")),
                    csv,
                )?;
                written += 1;
            }
        }
        let shown: Vec<String> = probs.iter().map(|p| format!("{p:.6}")).collect();
        let _ = writeln!(out, "probabilities {}", shown.join(" "));
    }
    let _ = writeln!(out, "wrote {written} files to {}", out_dir.display());
    Ok(())
}

fn parse_grid(s: &str) -> CliResult<(usize, usize)> {
    let bad = || Failure::Usage(format!("bad --grid `{s}` (expected HxW)"));
    let (h, w) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((
        h.trim().parse().map_err(|_| bad())?,
        w.trim().parse().map_err(|_| bad())?,
    ))
}

fn cmd_gradcheck(args: GradcheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<bool> {
    let mut r = Resolved::load(args.common.config.as_deref())?;
    let arch = r.or("arch", args.arch, DEFAULT_GRADCHECK_ARCH.to_string())?;
    let grid = parse_grid(&r.or("grid", args.grid, "5x5".to_string())?)?;
    let tolerance = r.or("tolerance", args.tolerance, 1e-4)?;
    let seed = r.or("seed", args.common.seed, 0)?;
    let threads = r.get("threads", args.common.threads)?;
    let spec =
        parse_architecture_inferred(&arch, grid).map_err(|e| Failure::Usage(e.to_string()))?;
    let report = with_threads(threads, || Ok(gradcheck(&spec, seed, tolerance)?))?;
    let _ = writeln!(out, "{report}");
    if !report.passed() {
        if let Some(w) = report.worst() {
            let _ = writeln!(
                err,
                "gradcheck failed: worst tensor {} (max rel err {:.6e})",
                w.name, w.max_rel_error
            );
        }
    }
    Ok(report.passed())
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let result = match cli.command {
        Command::Train(a) => cmd_train(a, out).map(|_| true),
        Command::Eval(a) => cmd_eval(a, out).map(|_| true),
        Command::Inspect(a) => cmd_inspect(a, out).map(|_| true),
        Command::Gradcheck(a) => cmd_gradcheck(a, out, err),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(
                err,
                "error: {msg}\n\nRun `tigranet <COMMAND> --help` for usage."
            );
            2
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

/// [`run_with`] on the process arguments and standard streams.
pub fn run() -> i32 {
    let (stdout, stderr) = (std::io::stdout(), std::io::stderr());
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(
            std::iter::once("tigranet").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn subsample_forms() {
        assert!(matches!(
            parse_subsample("2000,300,1000"),
            Ok((2000, 300, 1000))
        ));
        assert!(matches!(parse_subsample("50"), Ok((50, 50, 50))));
        assert!(parse_subsample("1,2").is_err());
        assert!(parse_subsample("x").is_err());
    }

    #[test]
    fn grid_parsing() {
        assert!(matches!(parse_grid("5x5"), Ok((5, 5))));
        assert!(matches!(parse_grid("3X4"), Ok((3, 4))));
        assert!(parse_grid("5").is_err());
    }

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[0.9, 0.92, 0.94]);
        assert!((m - 0.92).abs() < 1e-12);
        assert!((s - 0.02).abs() < 1e-12);
        assert_eq!(mean_std(&[0.5]), (0.5, 0.0));
    }

    #[test]
    fn usage_errors_exit_2() {
        let (code, _, err) = run_capture(&["train", "--out", "/tmp/x"]);
        assert_eq!(code, 2, "{err}");
        assert!(err.contains("--arch"));
        assert_eq!(run_capture(&["frobnicate"]).0, 2);
        assert_eq!(run_capture(&["--help"]).0, 0);
    }

    #[test]
    fn gradcheck_exit_codes() {
        let (code, out, _) = run_capture(&[
            "gradcheck",
            "--arch",
            "SC[2,1]-DP[4]-S[1]-FC[2]",
            "--grid",
            "3x3",
        ]);
        assert_eq!(code, 0, "{out}");
        assert!(
            out.contains("sc0.alpha") && out.contains("sc0.beta") && out.contains("fc0.weight")
        );
        let (code, _, err) = run_capture(&[
            "gradcheck",
            "--arch",
            "SC[2,1]-DP[4]-S[1]-FC[2]",
            "--grid",
            "3x3",
            "--tolerance",
            "1e-300",
        ]);
        assert_eq!(code, 1);
        assert!(err.contains("worst tensor"));
    }

    #[test]
    fn config_file_and_flag_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(
            &cfg,
            "# defaults\narch = S[1]-FC[2]\ngrid = 3x3\ntolerance = 1e-300\n",
        )
        .unwrap();
        let c = cfg.to_str().unwrap();
        assert_eq!(run_capture(&["gradcheck", "--config", c]).0, 1);
        assert_eq!(
            run_capture(&["gradcheck", "--config", c, "--tolerance", "1e-4"]).0,
            0
        );
        fs::write(&cfg, "bogus = 1\n").unwrap();
        assert_eq!(run_capture(&["gradcheck", "--config", c]).0, 2);
    }
}
