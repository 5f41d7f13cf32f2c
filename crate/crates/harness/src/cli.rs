//! Command-line interface. `main` only forwards to [`main_with_args`].

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sparsegen::basis::BasisKind;
use sparsegen::genmodel::zero_generator;
use sparsegen::recover::{gen_recover, lasso_with_clip, sparse_gen, sparse_gen_in_basis, SolveMode};
use sparsegen::sensing::EntryDistribution;
use sparsegen::verify::{self, Lemma1Config};
use sparsegen::{Basis, Ensemble, Generator, Vae};

use crate::config::FileConfig;
use crate::data::{load_idx, synthetic_glyphs, Dataset};
use crate::error::{HarnessError, Result};
use crate::experiment::{self, parse_algorithms, run_experiment, run_transfer, Algorithm, ExperimentGrid};
use crate::plot::{plot, Metric};
use crate::search::{grid_search, write_search_csv};

#[derive(Debug, Parser)]
#[command(name = "sparsegen", version, about = "Compressed sensing with generative priors and sparse deviations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the VAE and write its decoder weights.
    VaeTrain(VaeTrainArgs),
    /// Draw a measurement matrix and optionally sense one image.
    Sense(SenseArgs),
    /// Recover one image and write the result as JSON.
    Recover(RecoverArgs),
    /// Error-vs-measurements grid, written as CSV.
    Experiment(ExperimentArgs),
    /// Experiment with a generator trained on a different dataset.
    Transfer(ExperimentArgs),
    /// Empirical matrix-property and recovery-bound checks, as JSON.
    Verify(VerifyArgs),
    /// Render an experiment CSV as an SVG error-vs-m plot.
    Plot(PlotArgs),
    /// Validation grid over lambda and step size.
    GridSearch(GridSearchArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// IDX image file (gzip accepted).
    #[arg(long, conflicts_with = "glyphs")]
    pub data: Option<PathBuf>,
    /// Use this many synthetic binary stroke glyphs instead of a file.
    #[arg(long)]
    pub glyphs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub glyph_seed: u64,
    /// Threshold pixels at 0.5.
    #[arg(long)]
    pub binarize: bool,
    /// Index of the first image used.
    #[arg(long, default_value_t = 0)]
    pub offset: usize,
    /// Number of images used.
    #[arg(long, default_value_t = 200)]
    pub images: usize,
    /// Dataset name recorded in result rows.
    #[arg(long)]
    pub name: Option<String>,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        let full = match (&self.data, self.glyphs) {
            (Some(p), _) => load_idx(p, self.binarize)?,
            (None, Some(count)) => synthetic_glyphs(self.offset + count.min(self.images), self.glyph_seed),
            (None, None) => return Err(HarnessError::Invalid("one of --data or --glyphs is required".into())),
        };
        let mut ds = full.slice(self.offset, self.images);
        if ds.is_empty() {
            return Err(HarnessError::Empty(format!(
                "no images at offset {} (dataset has {})",
                self.offset,
                full.len()
            )));
        }
        if let Some(n) = &self.name {
            ds.name = n.clone();
        }
        Ok(ds)
    }
}

#[derive(Debug, Args, Default)]
pub struct SolverArgs {
    /// JSON file with solver or training settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub step_size: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// joint-subgradient or alternating-prox.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<SolveMode>,
    /// Report the unclipped estimate.
    #[arg(long)]
    pub no_clip: bool,
    #[arg(long)]
    pub clip_lo: Option<f64>,
    #[arg(long)]
    pub clip_hi: Option<f64>,
    #[arg(long)]
    pub latent_radius: Option<f64>,
    #[arg(long)]
    pub nu_steps: Option<usize>,
    #[arg(long)]
    pub warm_start: bool,
    /// LASSO weight (default 1/lambda).
    #[arg(long)]
    pub lasso_mu: Option<f64>,
    #[arg(long)]
    pub lasso_iterations: Option<usize>,
    /// Standard deviation of the measurement noise (default 0.1).
    #[arg(long)]
    pub noise_std: Option<f64>,
}

fn parse_mode(s: &str) -> std::result::Result<SolveMode, String> {
    s.parse().map_err(|e: sparsegen::Error| e.to_string())
}

fn parse_ensemble(s: &str) -> std::result::Result<EntryDistribution, String> {
    s.parse().map_err(|e: sparsegen::Error| e.to_string())
}

impl SolverArgs {
    fn resolve(&self) -> Result<FileConfig> {
        let flags = FileConfig {
            lambda: self.lambda,
            step_size: self.step_size,
            iterations: self.iterations,
            restarts: self.restarts,
            mode: self.mode,
            clip_lo: self.clip_lo,
            clip_hi: self.clip_hi,
            clip: self.no_clip.then_some(false),
            project_latent_radius: self.latent_radius,
            nu_steps: self.nu_steps,
            warm_start: self.warm_start.then_some(true),
            lasso_mu: self.lasso_mu,
            lasso_iterations: self.lasso_iterations,
            noise_std: self.noise_std,
            ..Default::default()
        };
        Ok(FileConfig::load_opt(self.config.as_deref())?.overlay(flags))
    }
}

/// Parses `50,100,150` or `50,100,...,750`, where `...` continues the
/// arithmetic progression of the two preceding values up to the next one.
pub fn parse_counts(s: &str) -> std::result::Result<Vec<usize>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let mut out: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < parts.len() {
        let p = parts[i];
        if p == "..." || p == "…" {
            let (Some(&b), Some(last)) = (out.last(), parts.get(i + 1)) else {
                return Err(format!("'{p}' needs a value on each side"));
            };
            let a = *out.iter().rev().nth(1).ok_or("'...' needs two values before it")?;
            let end: usize = last.parse().map_err(|_| format!("bad count '{last}'"))?;
            if b <= a || end < b || !(end - b).is_multiple_of(b - a) {
                return Err(format!("cannot step from {a},{b} to {end}"));
            }
            out.extend((b + (b - a)..=end).step_by(b - a));
            i += 2;
        } else {
            out.push(p.parse().map_err(|_| format!("bad count '{p}'"))?);
            i += 1;
        }
    }
    Ok(out)
}

fn parse_floats(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad number '{p}'")))
        .collect()
}

#[derive(Debug, Args)]
pub struct VaeTrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Decoder weights output.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch loss CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub latent: usize,
    #[arg(long, default_value = "500,500", value_parser = parse_counts)]
    pub hidden: ::std::vec::Vec<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SenseArgs {
    #[arg(long)]
    pub m: usize,
    /// Signal dimension; defaults to the image size when an image is sensed.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub noise_std: f64,
    /// gaussian (variance 1/m), gaussian-std (std 1/m) or bernoulli.
    #[arg(long, default_value = "gaussian", value_parser = parse_ensemble)]
    pub ensemble: EntryDistribution,
    /// Ensemble output file.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub data: Option<DataArgs>,
    /// Image to sense, relative to --offset.
    #[arg(long, default_value_t = 0)]
    pub image: usize,
    /// Write the measurements of that image as a JSON array.
    #[arg(long)]
    pub measurements: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[arg(long)]
    pub alg: String,
    /// Generator (decoder) weights.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "gaussian", value_parser = parse_ensemble)]
    pub ensemble: EntryDistribution,
    #[command(flatten)]
    pub data: DataArgs,
    /// Image to recover, relative to --offset.
    #[arg(long, default_value_t = 0)]
    pub image: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Store x_hat in this binary file instead of the JSON.
    #[arg(long)]
    pub xhat_blob: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated algorithms: lasso, lasso-dct, lasso-haar, gen, sparse-gen, sparse-gen-dct, sparse-gen-haar.
    #[arg(long, default_value = "lasso,gen,sparse-gen")]
    pub alg: String,
    /// Measurement counts, e.g. 50,100,...,750.
    #[arg(long, value_parser = parse_counts)]
    pub m: ::std::vec::Vec<usize>,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "gaussian", value_parser = parse_ensemble)]
    pub ensemble: EntryDistribution,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// One matrix per m shared by all images.
    #[arg(long)]
    pub shared_matrix: bool,
    /// Record wall-clock time per row (makes output nondeterministic).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub xhat_blob: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyProperty {
    Rip,
    Rec,
    Srec,
    Lemma1,
    Alpha,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub property: VerifyProperty,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "gaussian", value_parser = parse_ensemble)]
    pub ensemble: EntryDistribution,
    /// Check every support instead of sampling.
    #[arg(long)]
    pub exhaustive: bool,
    /// Generator weights for S-REC and bound checks (default: zero generator).
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub eps_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub mismatch: f64,
    /// Report file (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub csv: PathBuf,
    /// l1, l2, linf or measurement.
    #[arg(long, default_value = "l2")]
    pub metric: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GridSearchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "sparse-gen")]
    pub alg: String,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, value_parser = parse_counts)]
    pub m: ::std::vec::Vec<usize>,
    #[arg(long, default_value = "1,10,100,1000", value_parser = parse_floats)]
    pub lambdas: ::std::vec::Vec<f64>,
    #[arg(long, default_value = "0.001,0.01,0.1", value_parser = parse_floats)]
    pub steps: ::std::vec::Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// CSV with one row per (lambda, step) pair.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON report including the best pair.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn load_generator(path: Option<&Path>) -> Result<Option<Generator>> {
    path.map(|p| Generator::load_weights(p).map_err(Into::into)).transpose()
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn vae_train(a: VaeTrainArgs) -> Result<()> {
    let file = a.solver.resolve()?.overlay(FileConfig {
        epochs: a.epochs,
        learning_rate: a.learning_rate,
        batch_size: a.batch_size,
        seed: a.seed,
        ..Default::default()
    });
    let cfg = file.train();
    let ds = a.data.load()?;
    let model = Vae::new(ds.pixels(), &a.hidden, a.latent, cfg.seed)?;
    let (model, stats) = sparsegen::vae::train(&model, &ds.to_matrix()?, &cfg)?;
    if let Some(s) = stats.iter().find(|s| !s.mean_neg_elbo.is_finite()) {
        eprintln!("epoch {} produced a non-finite loss", s.epoch);
        return Err(sparsegen::Error::NonFinite("training loss").into());
    }
    model.decoder().save_weights(&a.out)?;
    if let Some(p) = &a.trace {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(p)?;
        for s in &stats {
            w.serialize(s)?;
        }
        w.flush()?;
    }
    for s in &stats {
        eprintln!(
            "epoch {:>3}  -elbo {:>10.4}  bce {:>10.4}  kl {:>8.4}",
            s.epoch, s.mean_neg_elbo, s.mean_bce, s.mean_kl
        );
    }
    Ok(())
}

fn sense(a: SenseArgs) -> Result<()> {
    let image = a.data.as_ref().filter(|d| d.data.is_some() || d.glyphs.is_some());
    let x = match image {
        Some(d) => {
            let ds = d.load()?;
            Some(
                ds.images
                    .get(a.image)
                    .cloned()
                    .ok_or_else(|| HarnessError::Invalid(format!("image {} out of range", a.image)))?,
            )
        }
        None => None,
    };
    let n = match (a.n, &x) {
        (Some(n), _) => n,
        (None, Some(x)) => x.len(),
        (None, None) => return Err(HarnessError::Invalid("--n is required when no image is given".into())),
    };
    let ens = Ensemble::random(a.m, n, a.noise_std, a.seed, a.ensemble)?;
    ens.save(&a.out)?;
    match (x, &a.measurements) {
        (Some(x), Some(p)) => write_json(&ens.sense(&x, sparsegen::rng::mix_seed(&[a.seed, 1]))?, Some(p))?,
        (None, Some(_)) => return Err(HarnessError::Invalid("--measurements needs an image".into())),
        _ => {}
    }
    Ok(())
}

#[derive(Serialize)]
struct RecoverOutput {
    algorithm: String,
    m: usize,
    seed: u64,
    image_index: usize,
    l1_err: f64,
    l2_err: f64,
    linf_err: f64,
    result: sparsegen::Recovery,
}

fn recover(a: RecoverArgs) -> Result<()> {
    let alg: Algorithm = a.alg.parse()?;
    let file = a.solver.resolve()?;
    let mut solver = file.solver();
    solver.seed = a.seed;
    let ds = a.data.load()?;
    let x = ds
        .images
        .get(a.image)
        .ok_or_else(|| HarnessError::Invalid(format!("image {} out of range", a.image)))?;
    let g = load_generator(a.weights.as_deref())?;
    if alg.needs_generator() && g.is_none() {
        return Err(HarnessError::MissingWeights(alg.name().into()));
    }
    let n = x.len();
    let ens = Ensemble::random(a.m, n, file.noise_std.unwrap_or(0.1), a.seed, a.ensemble)?;
    let y = ens.sense(x, sparsegen::rng::mix_seed(&[a.seed, 1]))?;
    let mu = file.lasso_mu.unwrap_or(1.0 / solver.lambda);
    let iters = file.lasso_iterations.unwrap_or(1000);
    let mut result = match (alg, g.as_ref()) {
        (Algorithm::Lasso(BasisKind::Identity), _) => lasso_with_clip(&ens, &y, mu, iters, solver.clip)?,
        (Algorithm::Lasso(kind), _) => {
            let b = Basis::for_signal(kind, n)?;
            let coeff = Ensemble::new(ens.matrix().matmul(&b.matrix().transpose())?, ens.noise_std(), a.seed)?;
            let mut r = lasso_with_clip(&coeff, &y, mu, iters, None)?;
            let mut xh = b.apply_inverse(&r.x_hat)?;
            if let Some((lo, hi)) = solver.clip {
                xh = sparsegen::clip_to_box(&xh, lo, hi)?;
            }
            r.measurement_error = experiment::error_metrics(ens.matrix(), x, &xh, &y)?.measurement;
            r.x_hat = xh;
            r
        }
        (Algorithm::Gen, Some(g)) => gen_recover(&ens, &y, g, &solver)?,
        (Algorithm::SparseGen(BasisKind::Identity), Some(g)) => sparse_gen(&ens, &y, g, &solver)?,
        (Algorithm::SparseGen(kind), Some(g)) => {
            sparse_gen_in_basis(&ens, &y, g, &Basis::for_signal(kind, n)?, &solver)?
        }
        _ => unreachable!("generator presence checked above"),
    };
    if !result.x_hat.iter().all(|v| v.is_finite()) {
        return Err(sparsegen::Error::NonFinite("recovered signal").into());
    }
    let e = experiment::error_metrics(ens.matrix(), x, &result.x_hat, &y)?;
    if let Some(p) = &a.xhat_blob {
        std::fs::write(p, experiment::encode_blob(std::slice::from_ref(&result.x_hat))?)?;
        result.x_hat.clear();
    }
    let out = RecoverOutput {
        algorithm: alg.name().into(),
        m: a.m,
        seed: a.seed,
        image_index: a.data.offset + a.image,
        l1_err: e.l1,
        l2_err: e.l2,
        linf_err: e.linf,
        result,
    };
    write_json(&out, Some(&a.out))
}

fn build_grid(data: &DataArgs, alg: &str, m: Vec<usize>, seed: u64, solver: &SolverArgs) -> Result<ExperimentGrid> {
    let file = solver.resolve()?;
    let mut grid = ExperimentGrid::new(data.load()?, parse_algorithms(alg)?, m, seed);
    grid.solver = file.solver();
    grid.lasso_mu = file.lasso_mu;
    if let Some(it) = file.lasso_iterations {
        grid.lasso_iterations = it;
    }
    if let Some(s) = file.noise_std {
        grid.noise_std = s;
    }
    Ok(grid)
}

fn experiment_cmd(a: ExperimentArgs, transfer: bool) -> Result<()> {
    let mut grid = build_grid(&a.data, &a.alg, a.m, a.seed, &a.solver)?;
    grid.ensemble = a.ensemble;
    grid.shared_matrix = a.shared_matrix;
    grid.record_timing = a.timing;
    let g = load_generator(a.weights.as_deref())?;
    let out = if transfer {
        let g = g.ok_or_else(|| HarnessError::MissingWeights("transfer".into()))?;
        let target = grid.dataset.clone();
        run_transfer(&g, target, grid, &a.out, a.xhat_blob.as_deref())?
    } else {
        run_experiment(&grid, g.as_ref(), &a.out, a.xhat_blob.as_deref())?
    };
    eprintln!("wrote {} rows to {}", out.rows.len(), a.out.display());
    Ok(())
}

fn verify_cmd(a: VerifyArgs) -> Result<()> {
    let ens = Ensemble::random(a.m, a.n, 0.0, a.seed, a.ensemble)?;
    let g = match load_generator(a.weights.as_deref())? {
        Some(g) => g,
        None => zero_generator(1, a.n)?,
    };
    let mat = ens.matrix();
    let check_seed = sparsegen::rng::mix_seed(&[a.seed, 2]);
    match a.property {
        VerifyProperty::Rip if a.exhaustive => write_json(&verify::check_rip_exhaustive(mat, a.l, a.alpha)?, a.out.as_deref()),
        VerifyProperty::Rip => write_json(&verify::check_rip(mat, a.l, a.alpha, a.trials, check_seed)?, a.out.as_deref()),
        VerifyProperty::Rec if a.exhaustive => write_json(&verify::check_rec_exhaustive(mat, a.l, a.gamma)?, a.out.as_deref()),
        VerifyProperty::Rec => write_json(&verify::check_rec(mat, a.l, a.gamma, a.trials, check_seed)?, a.out.as_deref()),
        VerifyProperty::Srec if a.exhaustive => {
            write_json(&verify::check_srec_exhaustive(mat, &g, a.l, a.gamma, a.delta)?, a.out.as_deref())
        }
        VerifyProperty::Srec => write_json(
            &verify::check_srec(mat, &g, a.l, a.gamma, a.delta, a.trials, check_seed)?,
            a.out.as_deref(),
        ),
        VerifyProperty::Alpha => {
            #[derive(Serialize)]
            struct AlphaReport {
                l: usize,
                measured_alpha: f64,
            }
            let measured_alpha = verify::measured_alpha(mat, &g, a.l)?;
            write_json(&AlphaReport { l: a.l, measured_alpha }, a.out.as_deref())
        }
        VerifyProperty::Lemma1 => {
            let noisy = Ensemble::new(mat.clone(), 0.0, a.seed)?;
            let cfg = Lemma1Config {
                l: a.l,
                alpha: a.alpha,
                delta: a.delta,
                eps_max: a.eps_max,
                mismatch: a.mismatch,
                trials: a.trials,
                seed: check_seed,
            };
            write_json(&verify::check_lemma1_bound(&noisy, &g, &cfg)?, a.out.as_deref())
        }
    }
}

fn plot_cmd(a: PlotArgs) -> Result<()> {
    let series = plot(&a.csv, a.metric.parse::<Metric>()?, &a.out)?;
    eprintln!("plotted {} series to {}", series.len(), a.out.display());
    Ok(())
}

fn grid_search_cmd(a: GridSearchArgs) -> Result<()> {
    let alg: Algorithm = a.alg.parse()?;
    let base = build_grid(&a.data, alg.name(), a.m, a.seed, &a.solver)?;
    let g = load_generator(a.weights.as_deref())?;
    let report = grid_search(&base, alg, g.as_ref(), &a.lambdas, &a.steps)?;
    write_search_csv(&report, std::fs::File::create(&a.out)?)?;
    if let Some(p) = &a.report {
        write_json(&report, Some(p))?;
    }
    eprintln!(
        "best: lambda {} step {} (mean l2 {:.6})",
        report.best.lambda, report.best.step_size, report.best.mean_l2_err
    );
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::VaeTrain(a) => vae_train(a),
        Command::Sense(a) => sense(a),
        Command::Recover(a) => recover(a),
        Command::Experiment(a) => experiment_cmd(a, false),
        Command::Transfer(a) => experiment_cmd(a, true),
        Command::Verify(a) => verify_cmd(a),
        Command::Plot(a) => plot_cmd(a),
        Command::GridSearch(a) => grid_search_cmd(a),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code: 0 success, 1 usage, 2 data or format, 3 NaN.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
