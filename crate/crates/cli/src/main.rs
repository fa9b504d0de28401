#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use idmatrix::bounds::{self, BoundParams};
use idmatrix::ensemble::EnsembleSpec;
use idmatrix::experiments::{self, Center, Execution, ExperimentConfig, FunctionalSpec, GridSpec, Side};
use idmatrix::levy::LevyModel;
use idmatrix::metrics::{self, Measure1D};
use idmatrix::reference_laws::{LawKind, ReferenceLaw};
use idmatrix::sampler::{RngState, Sampler, UniformMethod, LEPAGE_TERMS};
use idmatrix::{document, Error};
use serde_json::{Map, Value};

#[derive(Debug, Parser)]
#[command(name = "idmatrix", version, about = "Sample random matrices with infinitely divisible entries and check concentration bounds")]
struct Cli {
    /// Master seed (overrides the config's `master_seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replica loops (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory; results go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw ID vectors from a Lévy model document.
    Sample(SampleArgs),
    /// Eigenvalues of sampled matrices, optionally binned.
    Spectrum(SpectrumArgs),
    /// Evaluate closed-form bounds.
    #[command(subcommand)]
    Bound(BoundCommand),
    /// W₁ (or bounded-Lipschitz) distance of an ESD to a law or another ESD.
    Distance(DistanceArgs),
    /// Run an experiment config and compare tail estimates with bounds.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    SubGaussian,
    Lepage,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[arg(long, value_enum, default_value = "sub-gaussian")]
    method: Method,
    /// Arrival epochs for `--method lepage`.
    #[arg(long, default_value_t = LEPAGE_TERMS)]
    terms: usize,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    /// Experiment config supplying model and ensemble.
    #[arg(long, conflicts_with_all = ["model", "ensemble"], required_unless_present = "model")]
    config: Option<PathBuf>,
    #[arg(long, requires = "ensemble")]
    model: Option<PathBuf>,
    #[arg(long, requires = "model")]
    ensemble: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    /// Histogram of the pooled ESD with this many bins.
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum BoundCommand {
    /// Bound values on a δ grid as CSV.
    Eval(EvalArgs),
    /// Accepted theorem tags.
    List,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    theorem: String,
    /// `d0:d1:n`, `log:d0:d1:n` or a comma-separated list.
    #[arg(long)]
    grid: String,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long = "N", alias = "n")]
    n: Option<usize>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    e: Option<f64>,
    /// Any other bound parameter as `key=value` (JSON values accepted).
    #[arg(long = "param", value_parser = parse_key_value)]
    params: Vec<(String, Value)>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Law {
    Semicircle,
    MarchenkoPastur,
}

#[derive(Debug, Args)]
struct DistanceArgs {
    /// CSV of eigenvalues (one column, or a column named `eigenvalue`).
    #[arg(long)]
    esd: PathBuf,
    #[arg(long, value_enum, required_unless_present = "other")]
    law: Option<Law>,
    /// Second ESD file instead of a law.
    #[arg(long, conflicts_with = "law")]
    other: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    gamma_aspect: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Bounded-Lipschitz radius; adds a `bl` row.
    #[arg(long)]
    b: Option<f64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    config: PathBuf,
}

fn parse_key_value(s: &str) -> Result<(String, Value), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> anyhow::Result<String> {
    Ok(String::from_utf8(w.into_inner().context("flushing CSV")?)?)
}

fn emit(out: Option<&Path>, name: &str, text: &str) -> anyhow::Result<()> {
    match out {
        Some(dir) => std::fs::write(dir.join(name), text).with_context(|| format!("writing {}", dir.join(name).display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn require_file(path: &Path) -> anyhow::Result<()> {
    if !path.is_file() {
        let message = format!("input file {} does not exist", path.display());
        return Err(std::io::Error::new(std::io::ErrorKind::NotFound, message).into());
    }
    Ok(())
}

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    document::load(path).map_err(|e| Error::from(e).into())
}

fn execution(threads: Option<usize>) -> Execution {
    threads.map_or(Execution::Parallel, Execution::Threads)
}

fn sample(cli: &Cli, args: &SampleArgs) -> anyhow::Result<ExitCode> {
    let model: LevyModel = load(&args.model)?;
    let method = match args.method {
        Method::SubGaussian => UniformMethod::SubGaussian,
        Method::Lepage => UniformMethod::LePage { terms: args.terms },
    };
    let sampler = Sampler::with_method(&model, method);
    let mut rng = RngState::new(cli.seed.unwrap_or(0), args.stream);
    let mut w = csv_writer();
    w.write_record((1..=model.dim()).map(|i| format!("x{i}")))?;
    let mut row = vec![0.0; model.dim()];
    for _ in 0..args.count {
        sampler.sample_into(&mut rng, &mut row);
        w.write_record(row.iter().map(f64::to_string))?;
    }
    emit(cli.out.as_deref(), "samples.csv", &finish(w)?)?;
    Ok(ExitCode::SUCCESS)
}

fn spectrum(cli: &Cli, args: &SpectrumArgs) -> anyhow::Result<ExitCode> {
    let mut config: ExperimentConfig = match (&args.config, &args.model, &args.ensemble) {
        (Some(path), _, _) => load(path)?,
        (None, Some(m), Some(e)) => {
            let model: LevyModel = load(m)?;
            let ensemble: EnsembleSpec = load(e)?;
            ExperimentConfig {
                model,
                ensemble,
                functional: FunctionalSpec::LambdaMax,
                replicas: args.replicas,
                master_seed: 0,
                delta_grid: GridSpec::List(vec![1.0]),
                bounds: vec![],
                center: Center::FZero,
                side: Side::Upper,
                confidence: metrics::DEFAULT_CONFIDENCE,
                sampler: UniformMethod::default(),
            }
        }
        _ => bail!("spectrum needs --config or both --model and --ensemble"),
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if config.model.dim() != config.ensemble.entry_dim() {
        bail!(Error::Config(format!(
            "model dimension {} does not match the ensemble entry dimension {}",
            config.model.dim(),
            config.ensemble.entry_dim()
        )));
    }
    let spectra = experiments::replica_spectra(&config, args.replicas, execution(cli.threads))?;
    let mut w = csv_writer();
    w.write_record(["replica", "index", "eigenvalue"])?;
    for (r, s) in spectra.iter().enumerate() {
        for (i, l) in s.eigenvalues.iter().enumerate() {
            w.write_record([r.to_string(), i.to_string(), l.to_string()])?;
        }
    }
    let eigen_csv = finish(w)?;
    let histogram = match args.bins {
        Some(0) => bail!(Error::Config("--bins must be positive".into())),
        Some(bins) => {
            let all: Vec<f64> = spectra.iter().flat_map(|s| s.eigenvalues.iter().copied()).collect();
            let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
            let mut counts = vec![0usize; bins];
            for v in &all {
                counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
            }
            let mut w = csv_writer();
            w.write_record(["lo", "hi", "density"])?;
            for (j, c) in counts.iter().enumerate() {
                let density = *c as f64 / (all.len() as f64 * width);
                w.write_record([(lo + j as f64 * width).to_string(), (lo + (j + 1) as f64 * width).to_string(), density.to_string()])?;
            }
            Some(finish(w)?)
        }
        None => None,
    };
    match (cli.out.as_deref(), histogram) {
        (Some(dir), h) => {
            emit(Some(dir), "eigenvalues.csv", &eigen_csv)?;
            if let Some(h) = h {
                emit(Some(dir), "histogram.csv", &h)?;
            }
        }
        (None, Some(h)) => emit(None, "", &h)?,
        (None, None) => emit(None, "", &eigen_csv)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_deltas(text: &str) -> anyhow::Result<Vec<f64>> {
    if text.contains(':') {
        return Ok(bounds::parse_grid(text).map_err(Error::from)?);
    }
    let v: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    v.map_err(|_| Error::Config(format!("grid {text:?} is neither d0:d1:n, log:d0:d1:n nor a list")).into())
}

fn bound_eval(cli: &Cli, args: &EvalArgs) -> anyhow::Result<ExitCode> {
    if let Some(m) = &args.model {
        require_file(m)?;
    }
    if !bounds::TAGS.iter().any(|(t, _)| *t == args.theorem) {
        bail!(Error::Bound(bounds::BoundError::UnknownTag(args.theorem.clone())));
    }
    let deltas = parse_deltas(&args.grid)?;
    let model: Option<LevyModel> = args.model.as_deref().map(load).transpose()?;
    let mut map = Map::new();
    let mut put = |k: &str, v: Option<Value>| {
        if let Some(v) = v {
            map.insert(k.into(), v);
        }
    };
    put("n", args.n.map(Value::from));
    put("a", args.a.map(Value::from));
    put("b", args.b.map(Value::from));
    put("alpha", args.alpha.map(Value::from));
    put("sigma", args.sigma.map(Value::from));
    put("e", args.e.map(Value::from));
    for (k, v) in &args.params {
        map.insert(if k == "N" { "n".into() } else { k.clone() }, v.clone());
    }
    let params: BoundParams =
        serde_json::from_value(Value::Object(map)).map_err(|e| Error::Config(format!("bound parameters: {e}")))?;
    let curve = bounds::evaluate(&args.theorem, model.as_ref(), &params, &deltas).map_err(Error::from)?;
    let mut w = csv_writer();
    w.write_record(["delta", "bound", "valid", "reason"])?;
    for i in 0..curve.deltas.len() {
        w.write_record([
            curve.deltas[i].to_string(),
            curve.values[i].to_string(),
            curve.valid[i].to_string(),
            curve.reasons[i].clone().unwrap_or_default(),
        ])?;
    }
    let text = finish(w)?;
    emit(cli.out.as_deref(), "bound.csv", &text)?;
    if let Some(dir) = cli.out.as_deref() {
        document::save_json(&dir.join("bound.json"), &curve).map_err(Error::from)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn bound_list() -> anyhow::Result<ExitCode> {
    let mut w = csv_writer();
    w.write_record(["theorem", "description"])?;
    for (tag, what) in bounds::TAGS {
        w.write_record([tag, what])?;
    }
    print!("{}", finish(w)?);
    Ok(ExitCode::SUCCESS)
}

fn read_esd(path: &Path) -> anyhow::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut column = 0;
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if i == 0 {
            if let Some(j) = record.iter().position(|f| f.trim() == "eigenvalue") {
                column = j;
                continue;
            }
            if record.get(0).is_some_and(|f| f.trim().parse::<f64>().is_err()) {
                continue;
            }
        }
        let field = record.get(column).unwrap_or("").trim();
        let v: f64 = field
            .parse()
            .map_err(|_| Error::Config(format!("{}: line {} is not a number: {field:?}", path.display(), i + 1)))?;
        values.push(v);
    }
    Ok(values)
}

fn distance(cli: &Cli, args: &DistanceArgs) -> anyhow::Result<ExitCode> {
    require_file(&args.esd)?;
    if let Some(o) = &args.other {
        require_file(o)?;
    }
    let esd = Measure1D::empirical(&read_esd(&args.esd)?).map_err(Error::from)?;
    let reference = match (&args.other, args.law) {
        (Some(path), _) => Measure1D::empirical(&read_esd(path)?).map_err(Error::from)?,
        (None, Some(Law::Semicircle)) => Measure1D::law(ReferenceLaw::new(LawKind::Semicircle { scale: args.scale }).map_err(Error::from)?),
        (None, Some(Law::MarchenkoPastur)) => {
            let gamma_aspect = args
                .gamma_aspect
                .ok_or_else(|| Error::Config("marchenko_pastur needs --gamma-aspect".into()))?;
            Measure1D::law(ReferenceLaw::new(LawKind::MarchenkoPastur { gamma_aspect, sigma2: args.sigma2 }).map_err(Error::from)?)
        }
        (None, None) => unreachable!("clap requires --law or --other"),
    };
    let mut w = csv_writer();
    w.write_record(["metric", "value"])?;
    w.write_record(["w1".to_string(), metrics::w1(&esd, &reference).to_string()])?;
    if let Some(b) = args.b {
        if !(b > 0.0) {
            bail!(Error::Config(format!("--b {b} must be positive")));
        }
        w.write_record(["bl".to_string(), metrics::bl_distance(&esd, &reference, b).to_string()])?;
    }
    emit(cli.out.as_deref(), "distance.csv", &finish(w)?)?;
    Ok(ExitCode::SUCCESS)
}

fn verify(cli: &Cli, args: &VerifyArgs) -> anyhow::Result<ExitCode> {
    require_file(&args.config)?;
    let mut config: ExperimentConfig = load(&args.config)?;
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    let report = experiments::run_with(&config, execution(cli.threads))?;
    match cli.out.as_deref() {
        Some(dir) => report.write(dir)?,
        None => print!("{}", report.to_csv()),
    }
    let s = experiments::verify(&report);
    eprintln!("verify: {} PASS, {} FAIL, {} INCONCLUSIVE", s.pass, s.fail, s.inconclusive);
    for note in &s.notes {
        eprintln!("note: {note}");
    }
    Ok(if s.status == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    if let Some(dir) = cli.out.as_deref() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    }
    if cli.threads == Some(0) {
        bail!(Error::Config("--threads must be positive".into()));
    }
    match &cli.command {
        Command::Sample(a) => {
            require_file(&a.model)?;
            sample(cli, a)
        }
        Command::Spectrum(a) => {
            for p in [&a.config, &a.model, &a.ensemble].into_iter().flatten() {
                require_file(p)?;
            }
            spectrum(cli, a)
        }
        Command::Bound(BoundCommand::Eval(a)) => bound_eval(cli, a),
        Command::Bound(BoundCommand::List) => bound_list(),
        Command::Distance(a) => distance(cli, a),
        Command::Verify(a) => verify(cli, a),
    }
}

fn code(e: &anyhow::Error) -> &'static str {
    if let Some(e) = e.downcast_ref::<Error>() {
        e.code()
    } else if e.downcast_ref::<std::io::Error>().is_some() || e.downcast_ref::<csv::Error>().is_some() {
        "E_IO"
    } else {
        "E_RUNTIME"
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid usage").trim_start_matches("error: ");
            eprintln!("idmatrix: error[E_USAGE]: {first}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            let message = format!("{e:#}").replace('\n', " ");
            eprintln!("idmatrix: error[{}]: {message}", code(&e));
            ExitCode::FAILURE
        }
    }
}
