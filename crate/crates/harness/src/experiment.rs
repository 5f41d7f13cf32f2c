//! Error-vs-measurements experiment grids.
//!
//! A grid cell is one `(m, image)` pair. Every algorithm in a cell sees the
//! same measurement matrix and the same noisy measurements, so differences
//! between rows of a cell come from the algorithms alone.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sparsegen::basis::BasisKind;
use sparsegen::linalg::sub;
use sparsegen::recover::{gen_recover, lasso_with_clip, sparse_gen, sparse_gen_in_basis};
use sparsegen::rng::mix_seed;
use sparsegen::sensing::EntryDistribution;
use sparsegen::{norm, Basis, Ensemble, Generator, Matrix, Norm, SolverSettings};

use crate::data::Dataset;
use crate::error::{HarnessError, Result};

pub const CSV_HEADER: [&str; 10] = [
    "dataset",
    "algorithm",
    "m",
    "image_index",
    "seed",
    "l1_err",
    "l2_err",
    "linf_err",
    "measurement_err",
    "wall_ms",
];

const BLOB_MAGIC: &[u8; 4] = b"XHAT";
const BLOB_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Lasso(BasisKind),
    Gen,
    SparseGen(BasisKind),
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Lasso(BasisKind::Identity),
        Algorithm::Lasso(BasisKind::Dct),
        Algorithm::Lasso(BasisKind::Haar),
        Algorithm::Gen,
        Algorithm::SparseGen(BasisKind::Identity),
        Algorithm::SparseGen(BasisKind::Dct),
        Algorithm::SparseGen(BasisKind::Haar),
    ];

    pub fn name(self) -> &'static str {
        use BasisKind::*;
        match self {
            Algorithm::Lasso(Identity) | Algorithm::Lasso(Custom) => "lasso",
            Algorithm::Lasso(Dct) => "lasso-dct",
            Algorithm::Lasso(Haar) => "lasso-haar",
            Algorithm::Gen => "gen",
            Algorithm::SparseGen(Identity) | Algorithm::SparseGen(Custom) => "sparse-gen",
            Algorithm::SparseGen(Dct) => "sparse-gen-dct",
            Algorithm::SparseGen(Haar) => "sparse-gen-haar",
        }
    }

    pub fn needs_generator(self) -> bool {
        !matches!(self, Algorithm::Lasso(_))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| HarnessError::UnknownAlgorithm(s.to_string()))
    }
}

pub fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>> {
    list.split(',').map(|s| s.trim().parse()).collect()
}

#[derive(Debug, Clone)]
pub struct ExperimentGrid {
    pub dataset: Dataset,
    pub algorithms: Vec<Algorithm>,
    pub m_values: Vec<usize>,
    pub base_seed: u64,
    /// Standard deviation of the additive measurement noise.
    pub noise_std: f64,
    pub ensemble: EntryDistribution,
    /// Settings for `gen` and `sparse-gen*`; `seed` is replaced per cell.
    pub solver: SolverSettings,
    /// LASSO weight; `None` uses `1 / solver.lambda`, the weight that makes
    /// LASSO and a zero-generator Sparse-Gen share a minimizer.
    pub lasso_mu: Option<f64>,
    pub lasso_iterations: usize,
    /// One matrix per `m` shared across images instead of one per cell.
    pub shared_matrix: bool,
    /// Record `wall_ms`; off by default so equal seeds give identical files.
    pub record_timing: bool,
}

impl ExperimentGrid {
    pub fn new(dataset: Dataset, algorithms: Vec<Algorithm>, m_values: Vec<usize>, base_seed: u64) -> Self {
        Self {
            dataset,
            algorithms,
            m_values,
            base_seed,
            noise_std: 0.1,
            ensemble: EntryDistribution::default(),
            solver: SolverSettings::default(),
            lasso_mu: None,
            lasso_iterations: 1000,
            shared_matrix: false,
            record_timing: false,
        }
    }

    pub fn lasso_weight(&self) -> f64 {
        self.lasso_mu.unwrap_or(1.0 / self.solver.lambda)
    }

    pub fn validate(&self, generator: Option<&Generator>) -> Result<()> {
        let invalid = |s: String| Err(HarnessError::Invalid(s));
        if self.m_values.is_empty() {
            return invalid("m_values must not be empty".into());
        }
        if self.m_values.contains(&0) {
            return invalid("m values must be positive".into());
        }
        if self.m_values.windows(2).any(|w| w[0] >= w[1]) {
            return invalid(format!("m_values must be strictly ascending, got {:?}", self.m_values));
        }
        if self.algorithms.is_empty() {
            return invalid("no algorithms selected".into());
        }
        if self.dataset.is_empty() {
            return Err(HarnessError::Empty(format!("dataset '{}' has no images", self.dataset.name)));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return invalid(format!("noise std must be finite and nonnegative, got {}", self.noise_std));
        }
        if !(self.lasso_weight() > 0.0 && self.lasso_weight().is_finite()) {
            return invalid(format!("LASSO weight must be positive, got {}", self.lasso_weight()));
        }
        self.solver.validate()?;
        let n = self.dataset.pixels();
        if let Some(alg) = self.algorithms.iter().find(|a| a.needs_generator()) {
            let g = generator.ok_or_else(|| HarnessError::MissingWeights(alg.name().into()))?;
            if g.output_dim() != n {
                return invalid(format!(
                    "generator outputs {} values but images have {n} pixels",
                    g.output_dim()
                ));
            }
        }
        Ok(())
    }

    /// Seed of the cell `(m, image_index)`; also seeds its matrix.
    pub fn cell_seed(&self, m: usize, image_index: usize) -> u64 {
        mix_seed(&[self.base_seed, m as u64, image_index as u64])
    }

    fn matrix_seed(&self, m: usize, image_index: usize) -> u64 {
        if self.shared_matrix {
            mix_seed(&[self.base_seed, m as u64])
        } else {
            self.cell_seed(m, image_index)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub algorithm: String,
    pub m: usize,
    pub image_index: usize,
    pub seed: u64,
    pub l1_err: f64,
    pub l2_err: f64,
    pub linf_err: f64,
    pub measurement_err: f64,
    pub wall_ms: f64,
}

/// Rows plus the clipped estimate behind each one, in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub estimates: Vec<Vec<f64>>,
}

pub struct ErrorMetrics {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub measurement: f64,
}

pub fn error_metrics(a: &Matrix, x: &[f64], x_hat: &[f64], y: &[f64]) -> Result<ErrorMetrics> {
    let d = sub(x_hat, x);
    let r = sub(&a.matvec(x_hat)?, y);
    Ok(ErrorMetrics {
        l1: norm(&d, Norm::L1),
        l2: norm(&d, Norm::L2),
        linf: norm(&d, Norm::Inf),
        measurement: norm(&r, Norm::L2),
    })
}

struct CellContext<'a> {
    grid: &'a ExperimentGrid,
    generator: Option<&'a Generator>,
    bases: Vec<(BasisKind, Basis)>,
}

impl CellContext<'_> {
    fn basis(&self, kind: BasisKind) -> &Basis {
        &self.bases.iter().find(|(k, _)| *k == kind).expect("basis prepared").1
    }

    fn run(&self, m: usize, image_index: usize) -> Result<Vec<(ResultRow, Vec<f64>)>> {
        let grid = self.grid;
        let x = &grid.dataset.images[image_index];
        let n = x.len();
        let seed = grid.cell_seed(m, image_index);
        let ens = Ensemble::random(m, n, grid.noise_std, grid.matrix_seed(m, image_index), grid.ensemble)?;
        let y = ens.sense(x, mix_seed(&[seed, 1]))?;
        let mut solver = grid.solver;
        solver.seed = seed;
        let clip = solver.clip;

        let mut out = Vec::with_capacity(grid.algorithms.len());
        for &alg in &grid.algorithms {
            let start = Instant::now();
            let x_hat = match alg {
                Algorithm::Lasso(kind) => self.lasso_in_basis(&ens, &y, kind, clip)?,
                Algorithm::Gen => gen_recover(&ens, &y, self.generator.expect("validated"), &solver)?.x_hat,
                Algorithm::SparseGen(BasisKind::Identity) => {
                    sparse_gen(&ens, &y, self.generator.expect("validated"), &solver)?.x_hat
                }
                Algorithm::SparseGen(kind) => {
                    let g = self.generator.expect("validated");
                    sparse_gen_in_basis(&ens, &y, g, self.basis(kind), &solver)?.x_hat
                }
            };
            let wall_ms = if grid.record_timing {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            if !x_hat.iter().all(|v| v.is_finite()) {
                return Err(sparsegen::Error::NonFinite("recovered signal").into());
            }
            let e = error_metrics(ens.matrix(), x, &x_hat, &y)?;
            out.push((
                ResultRow {
                    dataset: grid.dataset.name.clone(),
                    algorithm: alg.name().to_string(),
                    m,
                    image_index,
                    seed,
                    l1_err: e.l1,
                    l2_err: e.l2,
                    linf_err: e.linf,
                    measurement_err: e.measurement,
                    wall_ms,
                },
                x_hat,
            ));
        }
        Ok(out)
    }

    /// LASSO on basis coefficients `c` with `x = B^T c`, i.e. with sensing matrix `A B^T`.
    fn lasso_in_basis(&self, ens: &Ensemble, y: &[f64], kind: BasisKind, clip: Option<(f64, f64)>) -> Result<Vec<f64>> {
        let mu = self.grid.lasso_weight();
        let iters = self.grid.lasso_iterations;
        if kind == BasisKind::Identity {
            return Ok(lasso_with_clip(ens, y, mu, iters, clip)?.x_hat);
        }
        let b = self.basis(kind);
        let abt = ens.matrix().matmul(&b.matrix().transpose())?;
        let coeff_ens = Ensemble::new(abt, ens.noise_std(), ens.seed())?;
        let c = lasso_with_clip(&coeff_ens, y, mu, iters, None)?.x_hat;
        let mut x_hat = b.apply_inverse(&c)?;
        if let Some((lo, hi)) = clip {
            x_hat = sparsegen::clip_to_box(&x_hat, lo, hi)?;
        }
        Ok(x_hat)
    }
}

/// Runs every cell of the grid. Rows come back sorted by
/// `(dataset, algorithm, m, image_index)` whatever order cells finish in.
pub fn run_grid(grid: &ExperimentGrid, generator: Option<&Generator>) -> Result<ExperimentOutput> {
    grid.validate(generator)?;
    let n = grid.dataset.pixels();
    let mut kinds: Vec<BasisKind> = Vec::new();
    for a in &grid.algorithms {
        if let Algorithm::Lasso(k) | Algorithm::SparseGen(k) = *a {
            if k != BasisKind::Identity && !kinds.contains(&k) {
                kinds.push(k);
            }
        }
    }
    let bases = kinds
        .into_iter()
        .map(|k| Basis::for_signal(k, n).map(|b| (k, b)))
        .collect::<sparsegen::Result<Vec<_>>>()?;
    let ctx = CellContext { grid, generator, bases };

    let cells: Vec<(usize, usize)> = grid
        .m_values
        .iter()
        .flat_map(|&m| (0..grid.dataset.len()).map(move |i| (m, i)))
        .collect();
    let workers = std::thread::available_parallelism()
        .map(|w| w.get())
        .unwrap_or(1)
        .min(cells.len());
    let ctx = &ctx;
    let cells = &cells;
    let chunks: Vec<Result<Vec<(ResultRow, Vec<f64>)>>> = if workers <= 1 {
        vec![cells.iter().map(|&(m, i)| ctx.run(m, i)).flat_concat()]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    s.spawn(move || {
                        cells
                            .iter()
                            .skip(w)
                            .step_by(workers)
                            .map(|&(m, i)| ctx.run(m, i))
                            .flat_concat()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        })
    };
    let mut all = Vec::new();
    for c in chunks {
        all.extend(c?);
    }
    all.sort_by(|(a, _), (b, _)| {
        (&a.dataset, &a.algorithm, a.m, a.image_index).cmp(&(&b.dataset, &b.algorithm, b.m, b.image_index))
    });
    let (rows, estimates) = all.into_iter().unzip();
    Ok(ExperimentOutput { rows, estimates })
}

trait FlatConcat<T> {
    fn flat_concat(self) -> Result<Vec<T>>;
}

impl<T, I: Iterator<Item = Result<Vec<T>>>> FlatConcat<T> for I {
    fn flat_concat(self) -> Result<Vec<T>> {
        let mut out = Vec::new();
        for part in self {
            out.extend(part?);
        }
        Ok(out)
    }
}

/// Runs the grid, writes the results CSV to `out_path` and, when given, the
/// clipped estimates to `blob_path`.
pub fn run_experiment(
    grid: &ExperimentGrid,
    generator: Option<&Generator>,
    out_path: &Path,
    blob_path: Option<&Path>,
) -> Result<ExperimentOutput> {
    let out = run_grid(grid, generator)?;
    write_csv(&out.rows, std::fs::File::create(out_path)?)?;
    if let Some(p) = blob_path {
        std::fs::write(p, encode_blob(&out.estimates)?)?;
    }
    Ok(out)
}

/// The same pipeline with a generator trained on another dataset.
pub fn run_transfer(
    source: &Generator,
    target: Dataset,
    mut grid: ExperimentGrid,
    out_path: &Path,
    blob_path: Option<&Path>,
) -> Result<ExperimentOutput> {
    grid.dataset = target;
    run_experiment(&grid, Some(source), out_path, blob_path)
}

pub fn write_csv<W: Write>(rows: &[ResultRow], w: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .has_headers(false)
        .from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    for col in CSV_HEADER {
        if !headers.iter().any(|h| h == col) {
            return Err(HarnessError::MissingColumn(col.into()));
        }
    }
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// `XHAT`, version, row count and length as little-endian `u32`, then the
/// estimates as little-endian `f64` in row order.
pub fn encode_blob(estimates: &[Vec<f64>]) -> Result<Vec<u8>> {
    let n = estimates.first().map_or(0, Vec::len);
    if estimates.iter().any(|e| e.len() != n) {
        return Err(HarnessError::Invalid("estimates have unequal lengths".into()));
    }
    let mut b = Vec::with_capacity(16 + 8 * n * estimates.len());
    b.extend_from_slice(BLOB_MAGIC);
    for v in [BLOB_VERSION, estimates.len() as u32, n as u32] {
        b.extend_from_slice(&v.to_le_bytes());
    }
    for v in estimates.iter().flatten() {
        b.extend_from_slice(&v.to_le_bytes());
    }
    Ok(b)
}

pub fn decode_blob(bytes: &[u8]) -> Result<Vec<Vec<f64>>> {
    let bad = |s: &str| HarnessError::Invalid(format!("x_hat blob: {s}"));
    if bytes.len() < 16 || &bytes[..4] != BLOB_MAGIC {
        return Err(bad("missing XHAT header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    if word(4) != BLOB_VERSION as usize {
        return Err(bad("unsupported version"));
    }
    let (count, n) = (word(8), word(12));
    if bytes.len() != 16 + 8 * count * n {
        return Err(bad("payload length does not match header"));
    }
    let vals: Vec<f64> = bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(if n == 0 {
        vec![Vec::new(); count]
    } else {
        vals.chunks(n).map(<[f64]>::to_vec).collect()
    })
}
