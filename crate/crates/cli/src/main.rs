use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gkl_core::dataset::{fetch_dataset, load_dataset, DatasetBundle};
use gkl_core::matrix::write_metadata;
use gkl_core::pipeline::{classify, format_accuracy};
use gkl_core::{Error, ErrorClass, GraphKernel, KernelName, KernelSpec, Result};

#[derive(Parser)]
#[command(
    name = "gkl",
    version,
    about = "Graph kernels: fetch datasets, compute kernel matrices, classify, benchmark"
)]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Repository base URL; `{base}/{NAME}.zip` is downloaded.
    #[arg(long)]
    base_url: Option<String>,

    /// Dataset cache (default: $GKL_CACHE_DIR, then the platform data dir).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    kernel: String,

    /// Kernel parameter as name=value; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,

    /// Cosine-normalize the kernel matrix.
    #[arg(long)]
    normalize: bool,

    /// Nystrom approximation with this many landmarks.
    #[arg(long, value_name = "Q")]
    nystrom: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Download a dataset into the cache and print its directory.
    Fetch {
        name: String,
        #[command(flatten)]
        source: Source,
    },
    /// Compute the fit kernel matrix of a dataset and write it as CSV.
    Compute {
        dataset: String,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        source: Source,
    },
    /// Train/test split, kernel SVM, accuracy on the test part.
    Classify {
        dataset: String,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value_t = 0.1)]
        test_fraction: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
        #[command(flatten)]
        source: Source,
    },
    /// Time fit_transform for every dataset and kernel.
    Benchmark {
        #[arg(required = true)]
        datasets: Vec<String>,
        /// Kernels to time; repeatable (default: all).
        #[arg(long = "kernel")]
        kernels: Vec<String>,
        /// Per-kernel parameter as KERNEL.NAME=VALUE; repeatable.
        #[arg(long = "param", value_name = "KERNEL.NAME=VALUE")]
        params: Vec<String>,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        source: Source,
    },
}

#[derive(Default)]
struct RunReport {
    spec: Vec<(String, String)>,
    timings: Vec<(String, f64)>,
    shapes: Vec<(String, (usize, usize))>,
    warnings: Vec<String>,
    accuracy: Option<f64>,
}

impl RunReport {
    fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.spec {
            let _ = writeln!(s, "{k}: {v}");
        }
        for (name, (r, c)) in &self.shapes {
            let _ = writeln!(s, "shape.{name}: {r}x{c}");
        }
        for (phase, secs) in &self.timings {
            let _ = writeln!(s, "time.{phase}: {secs:.6} s");
        }
        if let Some(a) = self.accuracy {
            let _ = writeln!(s, "result.accuracy: {a:.6}");
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

fn build_spec(args: &KernelArgs, seed: u64) -> Result<KernelSpec> {
    let mut spec = KernelSpec::named(&args.kernel)?
        .normalized(args.normalize)
        .seeded(seed);
    spec.nystrom_components = args.nystrom;
    for p in &args.params {
        spec.set_param(p)?;
    }
    // validate before touching the dataset
    GraphKernel::new(spec.clone())?;
    Ok(spec)
}

fn load(name: &str, source: &Source) -> Result<(DatasetBundle, f64)> {
    let clock = Instant::now();
    let data = load_dataset(
        name,
        source.base_url.as_deref(),
        source.cache_dir.as_deref(),
    )?;
    Ok((data, clock.elapsed().as_secs_f64()))
}

fn zero_warnings(indices: &[usize]) -> Vec<String> {
    indices
        .iter()
        .map(|i| format!("graph {i}: zero self-kernel, normalized entries set to 0"))
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fetch { name, source } => {
            let fetched = fetch_dataset(
                &name,
                source.base_url.as_deref(),
                source.cache_dir.as_deref(),
            )?;
            if fetched.cached {
                println!("{} (cached)", fetched.path.display());
            } else {
                println!("{}", fetched.path.display());
            }
        }
        Command::Compute {
            dataset,
            kernel,
            seed,
            out,
            source,
        } => {
            let spec = build_spec(&kernel, seed)?;
            let (data, load_secs) = load(&dataset, &source)?;
            let clock = Instant::now();
            let (fitted, k) = GraphKernel::new(spec.clone())?.fit_transform(&data.graphs)?;
            let fit_secs = clock.elapsed().as_secs_f64();
            k.save_csv(&out)?;
            let mut meta = vec![("dataset".to_string(), dataset.clone())];
            meta.extend(spec.metadata());
            meta.push(("rows".into(), k.rows().to_string()));
            meta.push(("cols".into(), k.cols().to_string()));
            meta.push(("role".into(), k.role().as_str().to_string()));
            write_metadata(fs::File::create(sidecar(&out))?, &meta)?;

            let mut report = RunReport {
                spec: meta,
                timings: vec![
                    ("load".into(), load_secs),
                    ("fit_transform".into(), fit_secs),
                ],
                shapes: vec![("fit".into(), k.shape())],
                ..Default::default()
            };
            if spec.normalize {
                report.warnings = zero_warnings(&fitted.zero_self_kernels());
            }
            eprint!("{}", report.render());
            println!("{}", out.display());
        }
        Command::Classify {
            dataset,
            kernel,
            test_fraction,
            seed,
            c,
            source,
        } => {
            let spec = build_spec(&kernel, seed)?;
            let (data, load_secs) = load(&dataset, &source)?;
            let result = classify(&data, &spec, test_fraction, c)?;
            let mut spec_echo = vec![("dataset".to_string(), dataset.clone())];
            spec_echo.extend(spec.metadata());
            spec_echo.push(("test_fraction".into(), test_fraction.to_string()));
            spec_echo.push(("C".into(), c.to_string()));
            let mut timings = vec![("load".to_string(), load_secs)];
            timings.extend(result.timings.iter().map(|(p, s)| (p.to_string(), *s)));
            let report = RunReport {
                spec: spec_echo,
                timings,
                shapes: vec![
                    ("train".into(), result.train_shape),
                    ("test".into(), result.test_shape),
                ],
                warnings: if spec.normalize {
                    zero_warnings(&result.zero_self_kernels)
                } else {
                    Vec::new()
                },
                accuracy: Some(result.accuracy),
            };
            eprint!("{}", report.render());
            println!("{}", format_accuracy(result.accuracy));
        }
        Command::Benchmark {
            datasets,
            kernels,
            params,
            repeats,
            seed,
            out,
            source,
        } => benchmark(
            &datasets,
            &kernels,
            &params,
            repeats.max(1),
            seed,
            &out,
            &source,
        )?,
    }
    Ok(())
}

fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".meta");
    PathBuf::from(name)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn benchmark(
    datasets: &[String],
    kernels: &[String],
    params: &[String],
    repeats: usize,
    seed: u64,
    out: &Path,
    source: &Source,
) -> Result<()> {
    let names: Vec<KernelName> = if kernels.is_empty() {
        KernelName::ALL.to_vec()
    } else {
        kernels.iter().map(|k| k.parse()).collect::<Result<_>>()?
    };
    let mut specs = Vec::with_capacity(names.len());
    for &name in &names {
        let mut spec = KernelSpec::new(name).seeded(seed);
        for p in params {
            let (scope, assignment) = p.split_once('.').ok_or_else(|| Error::InvalidSpec {
                param: p.clone(),
                reason: "expected KERNEL.NAME=VALUE".into(),
            })?;
            if scope.parse::<KernelName>()? == name {
                spec.set_param(assignment)?;
            }
        }
        GraphKernel::new(spec.clone())?;
        specs.push(spec);
    }

    let mut csv = String::from("dataset,kernel,seconds\n");
    let mut first_error = None;
    let mut any_ok = false;
    for dataset in datasets {
        let data = load(dataset, source).map(|(d, _)| d);
        for spec in &specs {
            let cell = data.as_ref().map_err(clone_error).and_then(|data| {
                let kernel = GraphKernel::new(spec.clone())?;
                let mut times = Vec::with_capacity(repeats);
                for _ in 0..repeats {
                    let clock = Instant::now();
                    kernel.fit_transform(&data.graphs)?;
                    times.push(clock.elapsed().as_secs_f64());
                }
                Ok(median(times))
            });
            match cell {
                Ok(secs) => {
                    any_ok = true;
                    let _ = writeln!(csv, "{dataset},{},{secs:.6}", spec.kernel);
                    eprintln!(
                        "{dataset} {}: {secs:.6} s (median of {repeats})",
                        spec.kernel
                    );
                }
                Err(e) => {
                    let _ = writeln!(csv, "{dataset},{},NA", spec.kernel);
                    eprintln!("{dataset} {}: NA ({e})", spec.kernel);
                    first_error.get_or_insert(e);
                }
            }
        }
    }
    fs::write(out, csv)?;
    println!("{}", out.display());
    match first_error {
        Some(e) if !any_ok => Err(e),
        _ => Ok(()),
    }
}

// dataset errors are reported once per kernel cell
fn clone_error(e: &Error) -> Error {
    match e {
        Error::Fetch { status, message } => Error::Fetch {
            status: *status,
            message: message.clone(),
        },
        other => Error::CorruptDataset {
            file: PathBuf::new(),
            line: None,
            reason: other.to_string(),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
        {
            eprintln!("warning: could not set thread count: {e}");
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Io => 1,
                ErrorClass::Input => 2,
                ErrorClass::Numerical => 3,
            })
        }
    }
}
