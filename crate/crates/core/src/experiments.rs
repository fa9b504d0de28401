//! Monte-Carlo verification of the bounds: sample replicas of `X_A`,
//! evaluate a spectral functional, estimate deviation probabilities with
//! Hoeffding bands and compare them with [`BoundCurve`]s.
//!
//! Replica `i` always draws from the stream derived from `(master_seed, i)`,
//! so reports do not depend on the number of threads. When the center is
//! estimated, replicas `[0, n/2)` estimate it and `[n/2, n)` the tails.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::bounds::{self, BoundCurve, BoundParams};
use crate::document;
use crate::ensemble::{Assembler, EnsembleSpec, Pattern};
use crate::levy::LevyModel;
use crate::metrics::{self, Measure1D, DEFAULT_CONFIDENCE};
use crate::reference_laws::{LawKind, ReferenceLaw};
use crate::sampler::{RngState, Sampler, UniformMethod};
use crate::spectra::{self, LipFn, LipSpec, Spectrum};
use crate::{Error, Result};

/// Fewer tail replicas than this make every verdict INCONCLUSIVE.
pub const MIN_VERDICT_REPLICAS: usize = 1000;

type Evaluator = dyn Fn(&Spectrum) -> Result<f64> + Sync;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionalSpec {
    LambdaMax,
    Rho,
    #[serde(rename = "tr_n_f")]
    TrNF { f: LipSpec },
    /// Distance of the ESD to a fixed measure; W₁ unless `b` is given.
    #[serde(rename = "d_w")]
    DW {
        target: TargetSpec,
        #[serde(default)]
        b: Option<f64>,
    },
    /// `sup_f |tr_N f - center_f|` over a finite family of `Lip_b(1)`
    /// functions: staircases with step `δ/4` of hats over `[k_lo, k_hi]`,
    /// and shifted clamps. The result is a lower bound of the true sup.
    SupOverLipb {
        b: f64,
        k_lo: f64,
        k_hi: f64,
        #[serde(default = "default_family")]
        family_size: usize,
    },
}

fn default_family() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Law(LawKind),
    Atoms { atoms: Vec<(f64, f64)> },
}

impl TargetSpec {
    pub fn build(&self) -> Result<Measure1D> {
        Ok(match self {
            TargetSpec::Law(kind) => Measure1D::law(ReferenceLaw::new(*kind)?),
            TargetSpec::Atoms { atoms } => Measure1D::from_atoms(atoms.clone())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Center {
    #[default]
    MedianEstimate,
    MeanEstimate,
    /// The functional evaluated at the zero matrix.
    FZero,
}

/// Which deviation of the functional `F` from its center `c` is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `F - c ≥ δ`.
    #[default]
    Upper,
    /// `c - F ≥ δ`.
    Lower,
    /// `|F - c| ≥ δ`.
    TwoSided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    /// `d0:d1:n` or `log:d0:d1:n`.
    Text(String),
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            GridSpec::List(v) => v.clone(),
            GridSpec::Text(t) => bounds::parse_grid(t)?,
        };
        if v.is_empty() || v.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::Config("delta_grid must be a nonempty list of positive numbers".into()));
        }
        Ok(v)
    }
}

/// A bound to compare against. `params` overrides the defaults taken from
/// the ensemble (`n`, `a`, `k_rows`) and the functional (`b`, `k_diameter`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundRequest {
    pub theorem: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: LevyModel,
    pub ensemble: EnsembleSpec,
    pub functional: FunctionalSpec,
    pub replicas: usize,
    pub master_seed: u64,
    pub delta_grid: GridSpec,
    #[serde(default)]
    pub bounds: Vec<BoundRequest>,
    #[serde(default)]
    pub center: Center,
    #[serde(default)]
    pub side: Side,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub sampler: UniformMethod,
}

fn default_confidence() -> f64 {
    DEFAULT_CONFIDENCE
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(document::load(path)?)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(&Sha256::digest(text.as_bytes())[..8])
    }

    fn validate(&self) -> Result<Vec<f64>> {
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be positive".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Config(format!("confidence {} must lie in (0, 1)", self.confidence)));
        }
        self.ensemble.validate()?;
        if self.model.dim() != self.ensemble.entry_dim() {
            return Err(Error::Config(format!(
                "model dimension {} does not match the ensemble entry dimension {}",
                self.model.dim(),
                self.ensemble.entry_dim()
            )));
        }
        if let FunctionalSpec::SupOverLipb { b, k_lo, k_hi, family_size } = self.functional {
            if !(b > 0.0) || !(k_hi > k_lo) || family_size == 0 {
                return Err(Error::Config("sup_over_lipb needs b > 0, k_hi > k_lo and a nonempty family".into()));
            }
        }
        self.delta_grid.values()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub theorem: String,
    pub delta: f64,
    pub p_hat: f64,
    pub lower: f64,
    pub upper: f64,
    pub bound: f64,
    pub valid: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub crate_version: String,
    pub master_seed: u64,
    pub replicas: usize,
    pub center_replicas: usize,
    pub tail_replicas: usize,
    pub config_digest: String,
    pub model_fingerprint: String,
    pub confidence: f64,
    pub interval: String,
    pub center: Value,
    pub functional: Value,
    pub constants: BTreeMap<String, Value>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub environment: Environment,
}

/// How replicas are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    /// Rayon with at most `threads` workers (all available when `None`).
    #[default]
    Parallel,
    Threads(usize),
}

fn replica_spectrum(sampler: &Sampler, assembler: &Assembler, master: u64, i: usize) -> Result<Spectrum> {
    let mut rng = RngState::replica(master, i as u64);
    let x = sampler.sample(&mut rng);
    let m = assembler.assemble(&x)?;
    Ok(spectra::eigenvalues(&m)?)
}

/// Spectra of replicas `0..count`, in index order.
pub fn replica_spectra(config: &ExperimentConfig, count: usize, exec: Execution) -> Result<Vec<Spectrum>> {
    let sampler = Sampler::with_method(&config.model, config.sampler);
    let assembler = Assembler::new(&config.ensemble)?;
    let one = |i: usize| replica_spectrum(&sampler, &assembler, config.master_seed, i);
    match exec {
        Execution::Serial => (0..count).map(one).collect(),
        Execution::Parallel => (0..count).into_par_iter().map(one).collect(),
        Execution::Threads(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| (0..count).into_par_iter().map(one).collect())
        }
    }
}

fn median_of(values: &[f64]) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn center_of(center: Center, values: &[f64], at_zero: f64) -> f64 {
    match center {
        Center::MedianEstimate => median_of(values),
        Center::MeanEstimate => mean_of(values),
        Center::FZero => at_zero,
    }
}

/// Empirical `P(Y ≥ δ)` with its Hoeffding band; works for any sample size.
fn band(ys: &[f64], delta: f64, confidence: f64) -> (f64, f64, f64) {
    let n = ys.len();
    let p = ys.iter().filter(|&&y| y >= delta).count() as f64 / n as f64;
    let r = metrics::hoeffding_radius(n, confidence);
    (p, (p - r).max(0.0), (p + r).min(1.0))
}

fn verdict(lower_bound: bool, valid: bool, enough: bool, lower: f64, upper: f64, bound: f64) -> Verdict {
    if !valid || !enough || bound.is_nan() {
        return Verdict::Inconclusive;
    }
    if lower_bound {
        if upper < bound {
            Verdict::Fail
        } else if lower >= bound {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        }
    } else if lower > bound {
        Verdict::Fail
    } else if upper <= bound {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    }
}

fn sup_family(b: f64, k_lo: f64, k_hi: f64, size: usize, delta: f64) -> Result<Vec<LipFn>> {
    let step = (k_hi - k_lo) / size as f64;
    let mut out = Vec::with_capacity(2 * size);
    for j in 0..size {
        let c = k_lo + (j as f64 + 0.5) * step;
        let hat = LipSpec::Hat { center: c, width: b }.build()?;
        out.push(LipFn::staircase(&hat, delta / 4.0, k_lo, k_hi)?);
        out.push(LipFn::shifted(c - 0.5 * b, b)?);
    }
    Ok(out)
}

fn bound_params(config: &ExperimentConfig, request: &BoundRequest) -> Result<BoundParams> {
    let mut base = Map::new();
    base.insert("n".into(), json!(config.ensemble.n));
    base.insert("a".into(), json!(config.ensemble.a()));
    if let Pattern::Wishart { k } = config.ensemble.pattern {
        base.insert("k_rows".into(), json!(k));
    }
    if let FunctionalSpec::SupOverLipb { b, k_lo, k_hi, .. } = config.functional {
        base.insert("b".into(), json!(b));
        base.insert("k_diameter".into(), json!(k_hi - k_lo));
    }
    if let FunctionalSpec::DW { b: Some(b), .. } = config.functional {
        base.insert("b".into(), json!(b));
    }
    for (k, v) in &request.params {
        base.insert(if k == "N" { "n".into() } else { k.clone() }, v.clone());
    }
    serde_json::from_value(Value::Object(base))
        .map_err(|e| Error::Config(format!("parameters of {}: {e}", request.theorem)))
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_with(config, Execution::Parallel)
}

pub fn run_with(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport> {
    let grid = config.validate()?;
    let n = config.replicas;
    let split = if config.center == Center::FZero { 0 } else { n / 2 };
    let tail_n = n - split;
    if tail_n == 0 {
        return Err(Error::Config("no replicas left for the tail estimates".into()));
    }
    let spectra = replica_spectra(config, n, exec)?;
    let order = config.ensemble.order();
    let zero = Spectrum::from_values(vec![0.0; order]);
    let mut notes = Vec::new();

    // deviations per δ, one vector of tail replicas each
    let (deviations, center_value, functional_summary): (Vec<Vec<f64>>, Value, Value) = match &config.functional {
        FunctionalSpec::SupOverLipb { b, k_lo, k_hi, family_size } => {
            notes.push("sup over Lip_b(1) is estimated over a finite family and is a lower bound of the true sup".into());
            let mut per_delta = Vec::with_capacity(grid.len());
            for &d in &grid {
                let family = sup_family(*b, *k_lo, *k_hi, *family_size, d)?;
                let centers: Vec<f64> = family
                    .iter()
                    .map(|f| match config.center {
                        Center::FZero => f.eval(0.0),
                        _ => mean_of(&spectra[..split].iter().map(|s| s.tr_n(&f.as_fn())).collect::<Vec<_>>()),
                    })
                    .collect();
                let ys: Vec<f64> = spectra[split..]
                    .iter()
                    .map(|s| family.iter().zip(&centers).map(|(f, c)| (s.tr_n(&f.as_fn()) - c).abs()).fold(0.0, f64::max))
                    .collect();
                per_delta.push(ys);
            }
            (per_delta, json!({"kind": "per_function_mean"}), json!({"family_size": 2 * family_size}))
        }
        functional => {
            let eval: Box<Evaluator> = match functional {
                FunctionalSpec::LambdaMax => Box::new(|s: &Spectrum| Ok(s.lambda_max())),
                FunctionalSpec::Rho => Box::new(|s: &Spectrum| Ok(s.rho())),
                FunctionalSpec::TrNF { f } => {
                    let f = f.build()?;
                    Box::new(move |s: &Spectrum| Ok(s.tr_n(&f.as_fn())))
                }
                FunctionalSpec::DW { target, b } => {
                    let target = target.build()?;
                    let b = *b;
                    Box::new(move |s: &Spectrum| {
                        let esd = Measure1D::from_esd(&s.esd())?;
                        Ok(match b {
                            Some(b) => metrics::bl_distance(&esd, &target, b),
                            None => metrics::w1(&esd, &target),
                        })
                    })
                }
                FunctionalSpec::SupOverLipb { .. } => unreachable!(),
            };
            let values: Vec<f64> = spectra.iter().map(&eval).collect::<Result<_>>()?;
            let c = center_of(config.center, &values[..split], eval(&zero)?);
            let ys: Vec<f64> = values[split..]
                .iter()
                .map(|&v| match config.side {
                    Side::Upper => v - c,
                    Side::Lower => c - v,
                    Side::TwoSided => (v - c).abs(),
                })
                .collect();
            let summary = json!({
                "min": values.iter().copied().fold(f64::INFINITY, f64::min),
                "max": values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                "mean": mean_of(&values),
            });
            (vec![ys; 1], json!({"kind": config.center, "value": c}), summary)
        }
    };
    let deviation_for = |i: usize| if deviations.len() == 1 { &deviations[0] } else { &deviations[i] };

    let enough = tail_n >= MIN_VERDICT_REPLICAS;
    if !enough {
        notes.push(format!("{tail_n} tail replicas is below {MIN_VERDICT_REPLICAS}; verdicts are INCONCLUSIVE"));
    }
    let mut constants = BTreeMap::new();
    let mut rows = Vec::new();
    for request in &config.bounds {
        let params = bound_params(config, request)?;
        let curve: BoundCurve = bounds::evaluate(&request.theorem, Some(&config.model), &params, &grid)?;
        let lower_bound = bounds::is_lower_bound(&request.theorem);
        for (i, &d) in grid.iter().enumerate() {
            let (p, lo, hi) = band(deviation_for(i), d, config.confidence);
            let (bound, valid) = (curve.values[i], curve.valid[i]);
            rows.push(ReportRow {
                theorem: request.theorem.clone(),
                delta: d,
                p_hat: p,
                lower: lo,
                upper: hi,
                bound,
                valid,
                verdict: verdict(lower_bound, valid, enough, lo, hi, bound),
            });
        }
        if !curve.valid.iter().any(|&v| v) {
            notes.push(format!("{}: no δ of the grid lies in the validity range", request.theorem));
        }
        constants.insert(request.theorem.clone(), json!({"aux": curve.aux, "params": curve.params}));
    }
    if config.bounds.is_empty() {
        for (i, &d) in grid.iter().enumerate() {
            let (p, lo, hi) = band(deviation_for(i), d, config.confidence);
            rows.push(ReportRow {
                theorem: String::new(),
                delta: d,
                p_hat: p,
                lower: lo,
                upper: hi,
                bound: f64::NAN,
                valid: false,
                verdict: Verdict::Inconclusive,
            });
        }
    }

    Ok(ExperimentReport {
        rows,
        environment: Environment {
            crate_version: env!("CARGO_PKG_VERSION").into(),
            master_seed: config.master_seed,
            replicas: n,
            center_replicas: split,
            tail_replicas: tail_n,
            config_digest: config.digest(),
            model_fingerprint: config.model.fingerprint(),
            confidence: config.confidence,
            interval: "Hoeffding (conservative)".into(),
            center: center_value,
            functional: json!({"spec": config.functional, "side": config.side, "summary": functional_summary}),
            constants,
            notes,
        },
    })
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(["theorem", "delta", "p_hat", "lower", "upper", "bound", "valid", "verdict"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.theorem.clone(),
                r.delta.to_string(),
                r.p_hat.to_string(),
                r.lower.to_string(),
                r.upper.to_string(),
                r.bound.to_string(),
                r.valid.to_string(),
                r.verdict.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    /// Writes `report.csv` and `report.json` (environment and summary) to `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| document::DocumentError::Io { path: dir.display().to_string(), source: e };
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join("report.csv"), self.to_csv()).map_err(io)?;
        let summary = verify(self);
        document::save_json(&dir.join("report.json"), &json!({"environment": self.environment, "summary": summary}))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub status: i32,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub notes: Vec<String>,
}

/// Status 1 iff any row FAILs.
pub fn verify(report: &ExperimentReport) -> VerifySummary {
    let count = |v: Verdict| report.rows.iter().filter(|r| r.verdict == v).count();
    let (pass, fail, inconclusive) = (count(Verdict::Pass), count(Verdict::Fail), count(Verdict::Inconclusive));
    let mut notes = Vec::new();
    if pass + fail == 0 {
        notes.push("no row produced a decisive verdict (bounds invalid on the grid or too few replicas)".into());
    }
    VerifySummary { status: i32::from(fail > 0), pass, fail, inconclusive, notes }
}
