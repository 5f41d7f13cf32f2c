//! Recovery algorithms: LASSO (FISTA), generator-only recovery, Sparse-Gen in
//! two solver modes, and an exhaustive decoder for toy-sized problems.

use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::basis::OrthonormalBasis;
use crate::error::{check_dim, Error, Result};
use crate::genmodel::GeneratorNetwork;
use crate::linalg::{
    dot, gemm, least_squares, norm, sign0, soft_threshold_in_place, top_singular_value, DenseMatrix, Norm,
};
use crate::optim::{Adam, AdamConfig, AdamMoments};
use crate::rng::SeededRng;
use crate::scalar::Real;
use crate::sensing::SensingEnsemble;

const RESTART_STREAM: u64 = 0x2e5_7a27;

/// Power-iteration estimates of `||A||^2` are inflated by this factor before
/// use as a Lipschitz constant.
const LIPSCHITZ_SLACK: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMode {
    /// Adam on `(z, nu)` jointly, with `sign(B nu)` as the l1 subgradient.
    #[default]
    JointSubgradient,
    /// Adam on `z`, exact proximal-gradient steps on `nu`.
    AlternatingProx,
}

impl FromStr for SolveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint-subgradient" | "joint" => Ok(Self::JointSubgradient),
            "alternating-prox" | "prox" => Ok(Self::AlternatingProx),
            other => Err(Error::InvalidArgument(format!("unknown solver mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig<T> {
    /// Weight on the measurement term of the joint objective.
    pub lambda: T,
    /// Adam learning rate.
    pub step_size: T,
    pub iterations: usize,
    pub restarts: usize,
    pub mode: SolveMode,
    /// Box applied to the final estimate only; `None` disables clipping.
    pub clip: Option<(T, T)>,
    /// Rescale `z` into the ball of this radius after every step.
    pub project_latent_radius: Option<T>,
    pub seed: u64,
    /// Proximal steps on `nu` per latent step (alternating mode).
    pub nu_steps: usize,
    /// Start each restart's `z` from the generator-only solution of the same restart.
    pub warm_start: bool,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            lambda: T::of(100.0),
            step_size: T::of(0.01),
            iterations: 1000,
            restarts: 10,
            mode: SolveMode::default(),
            clip: Some((T::zero(), T::one())),
            project_latent_radius: None,
            seed: 0,
            nu_steps: 1,
            warm_start: false,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !positive(self.lambda) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !positive(self.step_size) {
            return Err(Error::InvalidArgument(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if self.restarts == 0 || self.nu_steps == 0 {
            return Err(Error::InvalidArgument("restarts and nu_steps must be at least 1".into()));
        }
        if let Some((lo, hi)) = self.clip {
            if !(lo <= hi) {
                return Err(Error::InvalidArgument(format!("clip bounds out of order: {lo} > {hi}")));
            }
        }
        if let Some(r) = self.project_latent_radius {
            if !positive(r) {
                return Err(Error::InvalidArgument(format!("latent radius must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

/// Output of a recovery run. For generator methods the fields describe the
/// restart with the smallest measurement error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult<T> {
    pub x_hat: Vec<T>,
    pub z_hat: Option<Vec<T>>,
    pub nu_hat: Option<Vec<T>>,
    /// Objective before each iteration plus the final value (unclipped iterates).
    pub objective_trace: Vec<T>,
    /// `||A x_hat - y||_2`
    pub measurement_error: T,
    pub restarts_used: usize,
    pub best_restart: usize,
    /// Measurement error of every restart, in restart order.
    pub restart_errors: Vec<T>,
}

impl<T: Real> RecoveryResult<T> {
    pub fn final_objective(&self) -> Option<T> {
        self.objective_trace.last().copied()
    }
}

fn clip_vec<T: Real>(v: &mut [T], clip: Option<(T, T)>) {
    if let Some((lo, hi)) = clip {
        v.iter_mut().for_each(|x| *x = x.max(lo).min(hi));
    }
}

fn measurement_error<T: Real>(a: &DenseMatrix<T>, x: &[T], y: &[T]) -> T {
    let mut r = vec![T::zero(); a.rows()];
    a.matvec_into(x, &mut r);
    r.iter_mut().zip(y).for_each(|(ri, yi)| *ri -= *yi);
    norm(&r, Norm::L2)
}

fn lipschitz_sq<T: Real>(a: &DenseMatrix<T>) -> T {
    let s = top_singular_value(a, 30, T::zero());
    s * s * T::of(LIPSCHITZ_SLACK)
}

fn check_problem<T: Real>(e: &SensingEnsemble<T>, y: &[T]) -> Result<()> {
    e.check_measurements(y)?;
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("measurements"));
    }
    Ok(())
}

/// `min ||Ax - y||^2 + mu ||x||_1` by FISTA with adaptive restart; the
/// returned estimate is clipped to `[0, 1]`.
pub fn lasso<T: Real>(e: &SensingEnsemble<T>, y: &[T], mu: T, iterations: usize) -> Result<RecoveryResult<T>> {
    lasso_with_clip(e, y, mu, iterations, Some((T::zero(), T::one())))
}

pub fn lasso_with_clip<T: Real>(
    e: &SensingEnsemble<T>,
    y: &[T],
    mu: T,
    iterations: usize,
    clip: Option<(T, T)>,
) -> Result<RecoveryResult<T>> {
    check_problem(e, y)?;
    if !(mu > T::zero() && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
    }
    let a = e.matrix();
    let (m, n) = a.shape();
    let objective = |ax: &[T], x: &[T]| {
        let r2: T = ax.iter().zip(y).map(|(p, q)| (*p - *q) * (*p - *q)).sum();
        r2 + mu * norm(x, Norm::L1)
    };

    let lip = T::of(2.0) * lipschitz_sq(a);
    let step = if lip > T::zero() { T::one() / lip } else { T::one() };
    let mut x = vec![T::zero(); n];
    let mut ax = vec![T::zero(); m];
    let mut v = x.clone();
    let mut av = ax.clone();
    let mut t = T::one();
    let mut grad = vec![T::zero(); n];
    let mut r = vec![T::zero(); m];
    let mut x_new = vec![T::zero(); n];
    let mut ax_new = vec![T::zero(); m];
    let mut trace = Vec::with_capacity(iterations + 1);
    trace.push(objective(&ax, &x));
    for _ in 0..iterations {
        r.iter_mut().zip(av.iter().zip(y)).for_each(|(ri, (p, q))| *ri = *p - *q);
        a.tr_matvec_into(&r, &mut grad);
        let two_step = T::of(2.0) * step;
        x_new.iter_mut().zip(v.iter().zip(&grad)).for_each(|(xn, (vi, gi))| *xn = *vi - two_step * *gi);
        soft_threshold_in_place(&mut x_new, step * mu);
        a.matvec_into(&x_new, &mut ax_new);

        let t_new = (T::one() + (T::one() + T::of(4.0) * t * t).sqrt()) / T::of(2.0);
        // Restart momentum when the step points against the last direction.
        let against: T = v.iter().zip(x_new.iter().zip(&x)).map(|(vi, (xn, xo))| (*vi - *xn) * (*xn - *xo)).sum();
        if against > T::zero() {
            t = T::one();
            v.copy_from_slice(&x_new);
            av.copy_from_slice(&ax_new);
        } else {
            let beta = (t - T::one()) / t_new;
            t = t_new;
            for i in 0..n {
                v[i] = x_new[i] + beta * (x_new[i] - x[i]);
            }
            for i in 0..m {
                av[i] = ax_new[i] + beta * (ax_new[i] - ax[i]);
            }
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut ax, &mut ax_new);
        trace.push(objective(&ax, &x));
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("LASSO iterate"));
    }
    clip_vec(&mut x, clip);
    let err = measurement_error(a, &x, y);
    Ok(RecoveryResult {
        x_hat: x,
        z_hat: None,
        nu_hat: None,
        objective_trace: trace,
        measurement_error: err,
        restarts_used: 1,
        best_restart: 0,
        restart_errors: vec![err],
    })
}

/// Batched change of basis: row `i` becomes `B nu_i` (or `B^T c_i` when `inverse`).
fn basis_rows<T: Real>(basis: Option<&OrthonormalBasis<T>>, rows: &DenseMatrix<T>, inverse: bool) -> DenseMatrix<T> {
    match basis {
        Some(b) if !b.is_identity() => {
            let mut out = DenseMatrix::zeros(rows.rows(), rows.cols());
            gemm(T::one(), rows, false, b.matrix(), !inverse, T::zero(), &mut out);
            out
        }
        _ => rows.clone(),
    }
}

/// `R = X A^T - Y` row-wise.
fn residuals<T: Real>(a: &DenseMatrix<T>, x: &DenseMatrix<T>, y: &[T]) -> DenseMatrix<T> {
    let mut r = DenseMatrix::from_fn(x.rows(), a.rows(), |_, j| -y[j]);
    gemm(T::one(), x, false, a, true, T::one(), &mut r);
    r
}

fn project_rows<T: Real>(z: &mut DenseMatrix<T>, radius: Option<T>) {
    let Some(r) = radius else { return };
    for i in 0..z.rows() {
        let row = z.row_mut(i);
        let nz = norm(row, Norm::L2);
        if nz > r {
            let s = r / nz;
            row.iter_mut().for_each(|v| *v *= s);
        }
    }
}

fn initial_latents<T: Real>(restarts: usize, k: usize, seed: u64) -> DenseMatrix<T> {
    let root = SeededRng::with_stream(seed, RESTART_STREAM);
    let mut z = DenseMatrix::zeros(restarts, k);
    for i in 0..restarts {
        let mut rng = root.split(i as u64);
        z.row_mut(i).iter_mut().for_each(|v| *v = T::of(rng.normal()));
    }
    z
}

struct EngineOutput<T> {
    result: RecoveryResult<T>,
    latents: DenseMatrix<T>,
}

/// Shared first-order loop for generator-only (`with_nu = false`) and
/// Sparse-Gen recovery. All restarts advance together as rows of one batch.
///
/// The latent gradient is that of `||A(G(z)+nu) - y||^2` without the `lambda`
/// factor, so a run whose `nu` stays at zero follows exactly the
/// generator-only trajectory.
fn run_engine<T: Real>(
    e: &SensingEnsemble<T>,
    y: &[T],
    g: &GeneratorNetwork<T>,
    basis: Option<&OrthonormalBasis<T>>,
    cfg: &SolverConfig<T>,
    with_nu: bool,
    init: DenseMatrix<T>,
) -> Result<EngineOutput<T>> {
    let a = e.matrix();
    let n = a.cols();
    let restarts = cfg.restarts;
    let lambda = cfg.lambda;
    let two = T::of(2.0);
    let eta = T::one() / (two * lambda * lipschitz_sq(a)).max(T::min_positive_value());

    let mut z = init;
    let mut nu = DenseMatrix::zeros(restarts, n);
    let adam = Adam::new(AdamConfig::with_learning_rate(cfg.step_size));
    let mut adam = adam;
    let mut mz = AdamMoments::new(z.as_slice().len());
    let mut mnu = AdamMoments::new(nu.as_slice().len());
    let mut traces: Vec<Vec<T>> = vec![Vec::with_capacity(cfg.iterations + 1); restarts];

    let mut t = 0;
    let final_x = loop {
        let trace = g.forward_batch(&z)?;
        let mut x = trace.output().clone();
        if with_nu {
            x.as_mut_slice().iter_mut().zip(nu.as_slice()).for_each(|(xi, vi)| *xi += *vi);
        }
        let mut r = residuals(a, &x, y);
        let coeffs = with_nu.then(|| basis_rows(basis, &nu, false));
        for (i, tr) in traces.iter_mut().enumerate() {
            let r2 = dot(r.row(i), r.row(i));
            tr.push(match &coeffs {
                Some(c) => lambda * r2 + norm(c.row(i), Norm::L1),
                None => r2,
            });
        }
        if t == cfg.iterations {
            break x;
        }
        t += 1;

        if with_nu && cfg.mode == SolveMode::AlternatingProx {
            for _ in 0..cfg.nu_steps {
                let mut moved = nu.clone();
                gemm(-two * lambda * eta, &r, false, a, false, T::one(), &mut moved);
                let mut c = basis_rows(basis, &moved, false);
                soft_threshold_in_place(c.as_mut_slice(), eta);
                let next = basis_rows(basis, &c, true);
                let mut delta = next.clone();
                delta.as_mut_slice().iter_mut().zip(nu.as_slice()).for_each(|(d, o)| *d -= *o);
                gemm(T::one(), &delta, false, a, true, T::one(), &mut r);
                nu = next;
            }
        }

        let mut gx = DenseMatrix::zeros(restarts, n);
        gemm(two, &r, false, a, false, T::zero(), &mut gx);
        let gz = g.vjp_batch(&trace, &gx)?;
        adam.begin_step();
        adam.update(z.as_mut_slice(), gz.as_slice(), &mut mz);
        if with_nu && cfg.mode == SolveMode::JointSubgradient {
            let mut signs = basis_rows(basis, &nu, false);
            signs.as_mut_slice().iter_mut().for_each(|v| *v = sign0(*v));
            let mut gnu = basis_rows(basis, &signs, true);
            gnu.as_mut_slice().iter_mut().zip(gx.as_slice()).for_each(|(gv, gxi)| *gv += lambda * *gxi);
            adam.update(nu.as_mut_slice(), gnu.as_slice(), &mut mnu);
        }
        project_rows(&mut z, cfg.project_latent_radius);
    };

    let mut errors = Vec::with_capacity(restarts);
    let mut best: Option<(usize, T)> = None;
    for i in 0..restarts {
        let mut xi = final_x.row(i).to_vec();
        let err = if xi.iter().all(|v| v.is_finite()) {
            clip_vec(&mut xi, cfg.clip);
            measurement_error(a, &xi, y)
        } else {
            T::infinity()
        };
        errors.push(err);
        if err.is_finite() && best.is_none_or(|(_, b)| err < b) {
            best = Some((i, err));
        }
    }
    let (bi, berr) = best.ok_or(Error::NonFinite("recovery iterate (all restarts)"))?;
    let mut x_hat = final_x.row(bi).to_vec();
    clip_vec(&mut x_hat, cfg.clip);
    Ok(EngineOutput {
        result: RecoveryResult {
            x_hat,
            z_hat: Some(z.row(bi).to_vec()),
            nu_hat: with_nu.then(|| nu.row(bi).to_vec()),
            objective_trace: std::mem::take(&mut traces[bi]),
            measurement_error: berr,
            restarts_used: restarts,
            best_restart: bi,
            restart_errors: errors,
        },
        latents: z,
    })
}

fn check_generator<T: Real>(e: &SensingEnsemble<T>, g: &GeneratorNetwork<T>) -> Result<()> {
    check_dim(e.signal_dim(), g.output_dim(), "generator output vs signal dim")
}

/// `min_z ||A G(z) - y||^2` by Adam from `cfg.restarts` Gaussian starts.
pub fn gen_recover<T: Real>(
    e: &SensingEnsemble<T>,
    y: &[T],
    g: &GeneratorNetwork<T>,
    cfg: &SolverConfig<T>,
) -> Result<RecoveryResult<T>> {
    check_problem(e, y)?;
    check_generator(e, g)?;
    cfg.validate()?;
    let init = initial_latents(cfg.restarts, g.latent_dim(), cfg.seed);
    Ok(run_engine(e, y, g, None, cfg, false, init)?.result)
}

/// `min_{z, nu} ||nu||_1 + lambda ||A(G(z) + nu) - y||^2`.
pub fn sparse_gen<T: Real>(
    e: &SensingEnsemble<T>,
    y: &[T],
    g: &GeneratorNetwork<T>,
    cfg: &SolverConfig<T>,
) -> Result<RecoveryResult<T>> {
    sparse_gen_impl(e, y, g, None, cfg)
}

/// Sparse-Gen with the deviation sparse in `basis`: `||B nu||_1` replaces `||nu||_1`.
pub fn sparse_gen_in_basis<T: Real>(
    e: &SensingEnsemble<T>,
    y: &[T],
    g: &GeneratorNetwork<T>,
    basis: &OrthonormalBasis<T>,
    cfg: &SolverConfig<T>,
) -> Result<RecoveryResult<T>> {
    check_dim(e.signal_dim(), basis.dim(), "basis dim vs signal dim")?;
    sparse_gen_impl(e, y, g, Some(basis), cfg)
}

fn sparse_gen_impl<T: Real>(
    e: &SensingEnsemble<T>,
    y: &[T],
    g: &GeneratorNetwork<T>,
    basis: Option<&OrthonormalBasis<T>>,
    cfg: &SolverConfig<T>,
) -> Result<RecoveryResult<T>> {
    check_problem(e, y)?;
    check_generator(e, g)?;
    cfg.validate()?;
    let mut init = initial_latents(cfg.restarts, g.latent_dim(), cfg.seed);
    if cfg.warm_start {
        init = run_engine(e, y, g, None, cfg, false, init)?.latents;
    }
    Ok(run_engine(e, y, g, basis, cfg, true, init)?.result)
}

pub const ORACLE_MAX_SIGNAL_DIM: usize = 12;
pub const ORACLE_MAX_SPARSITY: usize = 2;
pub const ORACLE_MAX_LATENT_DIM: usize = 2;
const GRID_POINTS: usize = 21;
const GRID_RADIUS: f64 = 3.0;

pub(crate) fn check_tiny_scale<T: Real>(n: usize, l: usize, g: &GeneratorNetwork<T>) -> Result<()> {
    if n > ORACLE_MAX_SIGNAL_DIM || l > ORACLE_MAX_SPARSITY.min(n) {
        return Err(Error::ScaleLimit(format!(
            "exhaustive search needs n <= {ORACLE_MAX_SIGNAL_DIM} and l <= {ORACLE_MAX_SPARSITY}, got n={n}, l={l}"
        )));
    }
    if !g.is_constant() && g.latent_dim() > ORACLE_MAX_LATENT_DIM {
        return Err(Error::ScaleLimit(format!(
            "latent grid needs k <= {ORACLE_MAX_LATENT_DIM}, got k={}",
            g.latent_dim()
        )));
    }
    Ok(())
}

/// Generator outputs over the latent grid: 21 points per axis on `[-3, 3]^k`,
/// or the single output of a constant generator.
pub(crate) fn grid_outputs<T: Real>(g: &GeneratorNetwork<T>) -> Result<Vec<Vec<T>>> {
    let k = g.latent_dim();
    if g.is_constant() {
        return Ok(vec![g.forward(&vec![T::zero(); k])?]);
    }
    let axis: Vec<T> = (0..GRID_POINTS)
        .map(|i| T::of(-GRID_RADIUS + 2.0 * GRID_RADIUS * i as f64 / (GRID_POINTS - 1) as f64))
        .collect();
    let points: Vec<Vec<T>> = (0..k).map(|_| axis.iter().copied()).multi_cartesian_product().collect();
    let zb = DenseMatrix::from_rows(&points)?;
    let out = g.forward_batch(&zb)?;
    Ok((0..points.len()).map(|i| out.output().row(i).to_vec()).collect())
}

/// Orthonormal basis of the span of the given columns (Gram-Schmidt, applied twice).
fn orthonormal_columns<T: Real>(cols: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut q: Vec<Vec<T>> = Vec::new();
    for c in cols {
        let mut v = c.clone();
        let scale = norm(c, Norm::L2);
        for _ in 0..2 {
            for qi in &q {
                let p = dot(qi, &v);
                v.iter_mut().zip(qi).for_each(|(vi, qv)| *vi -= p * *qv);
            }
        }
        let nv = norm(&v, Norm::L2);
        if nv > T::of(1e-10) * scale.max(T::one()) {
            v.iter_mut().for_each(|x| *x /= nv);
            q.push(v);
        }
    }
    q
}

fn project_out<T: Real>(q: &[Vec<T>], v: &mut [T]) {
    for qi in q {
        let p = dot(qi, v);
        v.iter_mut().zip(qi).for_each(|(vi, qv)| *vi -= p * *qv);
    }
}

/// Coordinate descent for `min 0.5 ||M w - b||^2 + mu ||w||_1`, warm-started from `w`.
fn lasso_cd<T: Real>(m: &DenseMatrix<T>, b: &[T], mu: T, w: &mut [T]) {
    let cols: Vec<Vec<T>> = (0..m.cols()).map(|j| m.column(j)).collect();
    let sq: Vec<T> = cols.iter().map(|c| dot(c, c)).collect();
    let mut res = b.to_vec();
    for (j, c) in cols.iter().enumerate() {
        if w[j] != T::zero() {
            res.iter_mut().zip(c).for_each(|(r, cv)| *r -= w[j] * *cv);
        }
    }
    for _ in 0..100_000 {
        let mut max_change = T::zero();
        let mut max_w = T::zero();
        for (j, c) in cols.iter().enumerate() {
            if sq[j] <= T::min_positive_value() {
                continue;
            }
            let rho = w[j] + dot(c, &res) / sq[j];
            let t = mu / sq[j];
            let next = if rho > t {
                rho - t
            } else if rho < -t {
                rho + t
            } else {
                T::zero()
            };
            let d = next - w[j];
            if d != T::zero() {
                res.iter_mut().zip(c).for_each(|(r, cv)| *r -= d * *cv);
                w[j] = next;
            }
            max_change = max_change.max(d.abs());
            max_w = max_w.max(next.abs());
        }
        if max_change <= T::of(1e-14) * (T::one() + max_w) {
            break;
        }
    }
}

fn residual_norm<T: Real>(m: &DenseMatrix<T>, w: &[T], b: &[T]) -> T {
    let mut r = vec![T::zero(); m.rows()];
    m.matvec_into(w, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= *bi);
    norm(&r, Norm::L2)
}

/// `min ||w||_1` subject to `||M w - b|| <= eps`, or `None` if infeasible.
fn min_l1_in_tube<T: Real>(m: &DenseMatrix<T>, b: &[T], eps: T, tol: T) -> Option<Vec<T>> {
    let width = m.cols();
    if norm(b, Norm::L2) <= eps.max(tol) {
        return Some(vec![T::zero(); width]);
    }
    if eps <= tol {
        // Equality-constrained l1 minimization is an LP; its optimum sits at a
        // basic solution supported on `rank` columns.
        let rank = orthonormal_columns(&(0..width).map(|j| m.column(j)).collect::<Vec<_>>()).len();
        let mut best: Option<(T, Vec<T>)> = None;
        for cols in (0..width).combinations(rank) {
            let Ok(sol) = least_squares(&m.select_columns(&cols), b) else { continue };
            let mut w = vec![T::zero(); width];
            cols.iter().zip(&sol).for_each(|(&j, &v)| w[j] = v);
            if residual_norm(m, &w, b) > tol {
                continue;
            }
            let l1 = norm(&w, Norm::L1);
            if best.as_ref().is_none_or(|(b1, _)| l1 < *b1) {
                best = Some((l1, w));
            }
        }
        return best.map(|(_, w)| w);
    }
    // The LASSO residual grows with mu; bisect for the largest feasible mu.
    let mtb = m.tr_matvec(b).ok()?;
    let mut hi = norm(&mtb, Norm::Inf);
    let mut lo = hi * T::of(1e-12);
    let mut w = vec![T::zero(); width];
    lasso_cd(m, b, lo, &mut w);
    if residual_norm(m, &w, b) > eps {
        return None;
    }
    let mut feasible = w.clone();
    for _ in 0..200 {
        if hi / lo <= T::one() + T::of(1e-10) {
            break;
        }
        let mid = (lo * hi).sqrt();
        lasso_cd(m, b, mid, &mut w);
        if residual_norm(m, &w, b) <= eps {
            lo = mid;
            feasible.copy_from_slice(&w);
        } else {
            hi = mid;
        }
    }
    Some(feasible)
}

/// Exhaustive decoder `argmin { sigma_{l,G}(x) : ||A x - y||_2 <= eps_max }`.
///
/// Searches every size-`l` support and every latent grid point. For a fixed
/// `(z, S)` the coordinates on `S` are free, so they are eliminated by
/// projecting onto the orthogonal complement of `A_S`'s range, leaving an
/// l1 minimization over the remaining coordinates. Only toy sizes are accepted.
pub fn oracle_decode<T: Real>(
    e: &SensingEnsemble<T>,
    y: &[T],
    g: &GeneratorNetwork<T>,
    l: usize,
    eps_max: T,
) -> Result<Vec<T>> {
    check_problem(e, y)?;
    check_generator(e, g)?;
    let a = e.matrix();
    let (mdim, n) = a.shape();
    check_tiny_scale(n, l, g)?;
    if !(eps_max >= T::zero()) {
        return Err(Error::InvalidArgument(format!("eps_max must be nonnegative, got {eps_max}")));
    }
    let tol = T::of(1e-9) * norm(y, Norm::L2).max(T::one());
    let columns: Vec<Vec<T>> = (0..n).map(|j| a.column(j)).collect();

    let mut best: Option<(T, Vec<T>)> = None;
    for c in grid_outputs(g)? {
        let mut r = y.to_vec();
        let ac = a.matvec(&c)?;
        r.iter_mut().zip(&ac).for_each(|(ri, v)| *ri -= *v);
        for support in (0..n).combinations(l) {
            let rest: Vec<usize> = (0..n).filter(|j| !support.contains(j)).collect();
            let q = orthonormal_columns(&support.iter().map(|&j| columns[j].clone()).collect::<Vec<_>>());
            let mut pb = r.clone();
            project_out(&q, &mut pb);
            let mut pm = DenseMatrix::zeros(mdim, rest.len());
            for (jj, &j) in rest.iter().enumerate() {
                let mut col = columns[j].clone();
                project_out(&q, &mut col);
                for i in 0..mdim {
                    pm.set(i, jj, col[i]);
                }
            }
            let Some(w) = min_l1_in_tube(&pm, &pb, eps_max, tol) else { continue };
            let sigma = norm(&w, Norm::L1);
            if best.as_ref().is_some_and(|(s, _)| sigma >= *s) {
                continue;
            }
            // Complete the support coordinates by least squares on what remains.
            let mut x = c.clone();
            let mut rhs = r.clone();
            for (jj, &j) in rest.iter().enumerate() {
                x[j] += w[jj];
                rhs.iter_mut().zip(&columns[j]).for_each(|(ri, cv)| *ri -= w[jj] * *cv);
            }
            if !support.is_empty() {
                let us = least_squares(&a.select_columns(&support), &rhs)?;
                support.iter().zip(&us).for_each(|(&j, &u)| x[j] += u);
            }
            best = Some((sigma, x));
        }
    }
    best.map(|(_, x)| x).ok_or_else(|| {
        Error::Infeasible(format!("no signal within {eps_max} of the measurements"))
    })
}
