//! Empirical checks of the matrix conditions behind the recovery guarantees:
//! RIP, REC and S-REC by sampling or exhaustive search, the constants of the
//! mixed-norm bound, `sigma_{l,G}`, and a direct test of that bound with the
//! exhaustive decoder.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::genmodel::{Activation, GeneratorNetwork};
use crate::linalg::{norm, singular_value_range, sub, DenseMatrix, Norm};
use crate::recover::{check_tiny_scale, grid_outputs, oracle_decode};
use crate::rng::SeededRng;
use crate::scalar::Real;
use crate::sensing::SensingEnsemble;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Rip,
    Rec,
    Srec,
}

/// Outcome of a property check.
///
/// `worst_ratio` is the extreme observed value of the quantity the property
/// bounds: `max | ||Ax|| / ||x|| - 1 |` for RIP, `min ||Ax|| / ||x||` for REC
/// and `min (||A d|| + delta) / ||d||` over differences `d` for S-REC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub l: usize,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub trials: usize,
    pub violations: usize,
    pub worst_ratio: f64,
    /// True when every support was checked rather than sampled vectors.
    pub exhaustive: bool,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn satisfied_fraction(&self) -> f64 {
        if self.trials == 0 {
            1.0
        } else {
            1.0 - self.violations as f64 / self.trials as f64
        }
    }
}

fn check_sparsity(l: usize, n: usize) -> Result<()> {
    if l == 0 || l > n {
        return Err(Error::InvalidArgument(format!("sparsity must lie in 1..={n}, got {l}")));
    }
    Ok(())
}

fn check_unit_interval(name: &str, v: f64, open_top: bool) -> Result<()> {
    let ok = v > 0.0 && if open_top { v < 1.0 } else { v.is_finite() };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} out of range: {v}")))
    }
}

/// Random `l`-sparse unit vector: uniform support, Gaussian values.
fn sparse_unit<T: Real>(n: usize, l: usize, rng: &mut SeededRng) -> Vec<T> {
    let mut x = vec![T::zero(); n];
    loop {
        for j in rng.subset(n, l) {
            x[j] = T::of(rng.normal());
        }
        let nx = norm(&x, Norm::L2);
        if nx > T::zero() {
            x.iter_mut().for_each(|v| *v /= nx);
            return x;
        }
    }
}

fn gain<T: Real>(a: &DenseMatrix<T>, x: &[T]) -> f64 {
    let mut ax = vec![T::zero(); a.rows()];
    a.matvec_into(x, &mut ax);
    norm(&ax, Norm::L2).as_f64()
}

/// Samples `trials` random `l`-sparse unit vectors and counts those with
/// `||Ax||` outside `[1 - alpha, 1 + alpha]`.
pub fn check_rip<T: Real>(a: &DenseMatrix<T>, l: usize, alpha: f64, trials: usize, seed: u64) -> Result<PropertyReport> {
    check_sparsity(l, a.cols())?;
    check_unit_interval("alpha", alpha, false)?;
    let mut rng = SeededRng::new(seed);
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let r = gain(a, &sparse_unit::<T>(a.cols(), l, &mut rng));
        worst = worst.max((r - 1.0).abs());
        if r < 1.0 - alpha || r > 1.0 + alpha {
            violations += 1;
        }
    }
    Ok(PropertyReport {
        property: Property::Rip,
        l,
        alpha: Some(alpha),
        gamma: None,
        delta: None,
        trials,
        violations,
        worst_ratio: worst,
        exhaustive: false,
    })
}

/// Samples random `l`-sparse unit vectors and counts those with `||Ax|| < gamma`.
pub fn check_rec<T: Real>(a: &DenseMatrix<T>, l: usize, gamma: f64, trials: usize, seed: u64) -> Result<PropertyReport> {
    check_sparsity(l, a.cols())?;
    check_unit_interval("gamma", gamma, false)?;
    let mut rng = SeededRng::new(seed);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let r = gain(a, &sparse_unit::<T>(a.cols(), l, &mut rng));
        worst = worst.min(r);
        if r < gamma {
            violations += 1;
        }
    }
    Ok(PropertyReport {
        property: Property::Rec,
        l,
        alpha: None,
        gamma: Some(gamma),
        delta: None,
        trials,
        violations,
        worst_ratio: worst,
        exhaustive: false,
    })
}

/// Samples pairs `x_i = G(z_i) + nu_i` with `z_i ~ N(0, I)` and `nu_i` random
/// `l`-sparse with standard normal values, and counts pairs violating
/// `||A(x_1 - x_2)|| >= gamma ||x_1 - x_2|| - delta`.
pub fn check_srec<T: Real>(
    a: &DenseMatrix<T>,
    g: &GeneratorNetwork<T>,
    l: usize,
    gamma: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<PropertyReport> {
    let n = a.cols();
    check_dim(n, g.output_dim(), "generator output vs matrix columns")?;
    check_sparsity(l, n)?;
    check_unit_interval("gamma", gamma, false)?;
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be nonnegative, got {delta}")));
    }
    let k = g.latent_dim();
    let mut rng = SeededRng::new(seed);
    let draw = |rng: &mut SeededRng| -> Result<Vec<T>> {
        let z: Vec<T> = (0..k).map(|_| T::of(rng.normal())).collect();
        let mut x = g.forward(&z)?;
        for j in rng.subset(n, l) {
            x[j] += T::of(rng.normal());
        }
        Ok(x)
    };
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let d = sub(&draw(&mut rng)?, &draw(&mut rng)?);
        let nd = norm(&d, Norm::L2).as_f64();
        if nd == 0.0 {
            continue;
        }
        let ad = gain(a, &d);
        worst = worst.min((ad + delta) / nd);
        if ad < gamma * nd - delta {
            violations += 1;
        }
    }
    Ok(PropertyReport {
        property: Property::Srec,
        l,
        alpha: None,
        gamma: Some(gamma),
        delta: Some(delta),
        trials,
        violations,
        worst_ratio: worst,
        exhaustive: false,
    })
}

/// Extreme singular values of every `l`-column submatrix.
fn support_extremes<T: Real>(a: &DenseMatrix<T>, l: usize) -> Result<Vec<(f64, f64)>> {
    (0..a.cols())
        .combinations(l)
        .map(|s| singular_value_range(&a.select_columns(&s)).map(|(lo, hi)| (lo.as_f64(), hi.as_f64())))
        .collect()
}

/// RIP over every `l`-sparse vector: each support passes when the extreme
/// singular values of `A_S` lie in `[1 - alpha, 1 + alpha]`. `trials` counts supports.
pub fn check_rip_exhaustive<T: Real>(a: &DenseMatrix<T>, l: usize, alpha: f64) -> Result<PropertyReport> {
    check_sparsity(l, a.cols())?;
    check_unit_interval("alpha", alpha, false)?;
    let ext = support_extremes(a, l)?;
    let worst = ext.iter().map(|&(lo, hi)| (1.0 - lo).max(hi - 1.0)).fold(0.0, f64::max);
    Ok(PropertyReport {
        property: Property::Rip,
        l,
        alpha: Some(alpha),
        gamma: None,
        delta: None,
        trials: ext.len(),
        violations: ext.iter().filter(|&&(lo, hi)| lo < 1.0 - alpha || hi > 1.0 + alpha).count(),
        worst_ratio: worst,
        exhaustive: true,
    })
}

/// REC over every `l`-sparse vector, via the smallest singular value of each `A_S`.
pub fn check_rec_exhaustive<T: Real>(a: &DenseMatrix<T>, l: usize, gamma: f64) -> Result<PropertyReport> {
    check_sparsity(l, a.cols())?;
    check_unit_interval("gamma", gamma, false)?;
    let ext = support_extremes(a, l)?;
    Ok(PropertyReport {
        property: Property::Rec,
        l,
        alpha: None,
        gamma: Some(gamma),
        delta: None,
        trials: ext.len(),
        violations: ext.iter().filter(|&&(lo, _)| lo < gamma).count(),
        worst_ratio: ext.iter().map(|&(lo, _)| lo).fold(f64::INFINITY, f64::min),
        exhaustive: true,
    })
}

/// Columns spanning `range(G(z_1) - G(z_2))` for generators whose difference
/// set is a subspace: constant (empty) or a single linear layer.
fn difference_span<T: Real>(g: &GeneratorNetwork<T>) -> Result<Vec<Vec<T>>> {
    if g.is_constant() {
        return Ok(Vec::new());
    }
    match g.layers() {
        [layer] if layer.activation() == Activation::Identity => {
            Ok((0..layer.inputs()).map(|j| layer.weight().column(j)).collect())
        }
        _ => Err(Error::ScaleLimit(
            "exhaustive S-REC needs a constant or affine generator".into(),
        )),
    }
}

/// Orthonormal basis of the span of `cols`, as matrix columns.
fn orthonormal_basis<T: Real>(n: usize, cols: &[Vec<T>]) -> DenseMatrix<T> {
    let mut q: Vec<Vec<T>> = Vec::new();
    for c in cols {
        let mut v = c.clone();
        for _ in 0..2 {
            for qi in &q {
                let p = crate::linalg::dot(qi, &v);
                v.iter_mut().zip(qi).for_each(|(vi, qv)| *vi -= p * *qv);
            }
        }
        let nv = norm(&v, Norm::L2);
        if nv > T::of(1e-10) * norm(c, Norm::L2).max(T::one()) {
            v.iter_mut().for_each(|x| *x /= nv);
            q.push(v);
        }
    }
    DenseMatrix::from_fn(n, q.len(), |i, j| q[j][i])
}

/// S-REC over all of `S_{l,G}` for constant or affine `G`.
///
/// Differences of two points in `S_{l,G}` fill the subspaces
/// `range(W) + span(e_T)` with `|T| = 2l`, which are unbounded, so for any
/// `delta` the condition reduces to `sigma_min(A Q_T) >= gamma` on an
/// orthonormal basis `Q_T` of each subspace. `trials` counts subspaces.
pub fn check_srec_exhaustive<T: Real>(
    a: &DenseMatrix<T>,
    g: &GeneratorNetwork<T>,
    l: usize,
    gamma: f64,
    delta: f64,
) -> Result<PropertyReport> {
    let n = a.cols();
    check_dim(n, g.output_dim(), "generator output vs matrix columns")?;
    check_sparsity(l, n)?;
    check_unit_interval("gamma", gamma, false)?;
    let span = difference_span(g)?;
    let width = (2 * l).min(n);
    let mut lows = Vec::new();
    for support in (0..n).combinations(width) {
        let mut cols = span.clone();
        for &j in &support {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            cols.push(e);
        }
        let q = orthonormal_basis(n, &cols);
        let lo = if q.cols() > a.rows() {
            0.0
        } else {
            singular_value_range(&a.matmul(&q)?)?.0.as_f64()
        };
        lows.push(lo);
    }
    Ok(PropertyReport {
        property: Property::Srec,
        l,
        alpha: None,
        gamma: Some(gamma),
        delta: Some(delta),
        trials: lows.len(),
        violations: lows.iter().filter(|&&lo| lo < gamma).count(),
        worst_ratio: lows.iter().copied().fold(f64::INFINITY, f64::min),
        exhaustive: true,
    })
}

/// Smallest `alpha` for which `A` passes exhaustive RIP(2l, alpha) and
/// S-REC(S_{ceil(1.5 l), G}, 1 - alpha, 0): the matrix-side hypotheses of
/// the mixed-norm recovery bound.
pub fn measured_alpha<T: Real>(a: &DenseMatrix<T>, g: &GeneratorNetwork<T>, l: usize) -> Result<f64> {
    let rip = check_rip_exhaustive(a, (2 * l).min(a.cols()), 1.0)?;
    let srec = check_srec_exhaustive(a, g, (3 * l).div_ceil(2), f64::MIN_POSITIVE, 0.0)?;
    Ok(rip.worst_ratio.max(1.0 - srec.worst_ratio))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub alpha: f64,
    pub delta: f64,
    pub c0: f64,
    pub c1: f64,
    pub delta_prime: f64,
}

/// `C0 = 2((1+a)/(1-a) + 1)`, `C1 = 2/(1-a)`, `delta' = delta/(1-a)`.
pub fn bound_constants(alpha: f64, delta: f64) -> Result<BoundConstants> {
    check_unit_interval("alpha", alpha, true)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta must be nonnegative, got {delta}")));
    }
    let inv = 1.0 / (1.0 - alpha);
    Ok(BoundConstants {
        alpha,
        delta,
        c0: 2.0 * ((1.0 + alpha) * inv + 1.0),
        c1: 2.0 * inv,
        delta_prime: delta * inv,
    })
}

/// Sum of the `n - l` smallest magnitudes of `v`.
fn tail_l1<T: Real>(v: &[T], l: usize) -> T {
    let mut mags: Vec<T> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    mags[..v.len().saturating_sub(l)].iter().copied().sum()
}

/// `sigma_{l,G}(x)`: the least l1 distance from `x` to `{G(z) + nu : ||nu||_0 <= l}`,
/// with `z` restricted to the latent grid.
pub fn sigma_lg<T: Real>(x: &[T], g: &GeneratorNetwork<T>, l: usize) -> Result<T> {
    check_dim(g.output_dim(), x.len(), "signal length vs generator output")?;
    // The tail sum is closed-form in l, so only n and the latent grid are limited.
    check_tiny_scale(x.len(), 0, g)?;
    Ok(grid_outputs(g)?
        .iter()
        .map(|c| tail_l1(&sub(x, c), l))
        .fold(T::infinity(), |a, b| a.min(b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Config {
    pub l: usize,
    pub alpha: f64,
    pub delta: f64,
    pub eps_max: f64,
    /// Standard deviation of a dense perturbation added to each model point,
    /// so that `sigma_{l,G}(x) > 0`.
    pub mismatch: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub constants: BoundConstants,
    pub trials: usize,
    /// Trials with `||x - decoded|| > (2l)^(-1/2) C0 sigma + C1 eps_max + delta'`.
    pub violations: usize,
    /// Trials with `||A(x - decoded)|| > 2 eps_max`.
    pub tube_violations: usize,
    /// Largest `lhs - rhs` seen; negative when every trial has slack.
    pub worst_gap: f64,
    pub max_error: f64,
}

/// Draws signals near `S_{l,G}`, senses them with noise of norm at most
/// `eps_max`, decodes exhaustively and checks the mixed-norm error bound and
/// tube membership on every trial.
pub fn check_lemma1_bound<T: Real>(
    e: &SensingEnsemble<T>,
    g: &GeneratorNetwork<T>,
    cfg: &Lemma1Config,
) -> Result<Lemma1Report> {
    let a = e.matrix();
    let (m, n) = a.shape();
    check_dim(n, g.output_dim(), "generator output vs signal dim")?;
    check_sparsity(cfg.l, n)?;
    check_tiny_scale(n, cfg.l, g)?;
    if !(cfg.eps_max >= 0.0 && cfg.mismatch >= 0.0) {
        return Err(Error::InvalidArgument("eps_max and mismatch must be nonnegative".into()));
    }
    let constants = bound_constants(cfg.alpha, cfg.delta)?;
    let grid = grid_outputs(g)?;
    let scale = (2.0 * cfg.l as f64).powf(-0.5);
    let tol = 1e-7;
    let mut rng = SeededRng::new(cfg.seed);
    let mut report = Lemma1Report {
        constants,
        trials: cfg.trials,
        violations: 0,
        tube_violations: 0,
        worst_gap: f64::NEG_INFINITY,
        max_error: 0.0,
    };
    for _ in 0..cfg.trials {
        let mut x = grid[rng.below(grid.len())].clone();
        for j in rng.subset(n, cfg.l) {
            x[j] += T::of(rng.normal());
        }
        x.iter_mut().for_each(|v| *v += T::of(cfg.mismatch * rng.normal()));
        let mut noise: Vec<f64> = (0..m).map(|_| rng.normal()).collect();
        let nn = norm(&noise, Norm::L2);
        let radius = cfg.eps_max * rng.uniform();
        noise.iter_mut().for_each(|v| *v *= radius / nn.max(f64::MIN_POSITIVE));
        let mut y = a.matvec(&x)?;
        y.iter_mut().zip(&noise).for_each(|(yi, ni)| *yi += T::of(*ni));

        let decoded = oracle_decode(e, &y, g, cfg.l, T::of(cfg.eps_max))?;
        let diff = sub(&x, &decoded);
        let lhs = norm(&diff, Norm::L2).as_f64();
        let sigma = sigma_lg(&x, g, cfg.l)?.as_f64();
        let rhs = scale * constants.c0 * sigma + constants.c1 * cfg.eps_max + constants.delta_prime;
        report.worst_gap = report.worst_gap.max(lhs - rhs);
        report.max_error = report.max_error.max(lhs);
        if lhs > rhs * (1.0 + tol) + tol {
            report.violations += 1;
        }
        if gain(a, &diff) > 2.0 * cfg.eps_max * (1.0 + tol) + tol {
            report.tube_violations += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmodel::{affine_generator, random_relu_generator, zero_generator};
    use crate::sensing::{gaussian_ensemble, sufficient_measurements, MeasurementBound};
    use proptest::prelude::*;

    fn gaussian(m: usize, n: usize, seed: u64) -> DenseMatrix<f64> {
        gaussian_ensemble(m, n, 0.0, seed).unwrap().matrix().clone()
    }

    #[test]
    fn identity_is_an_isometry() {
        let a = DenseMatrix::<f64>::identity(12);
        for l in [1, 3, 12] {
            assert!(check_rip(&a, l, 0.01, 200, 1).unwrap().passed());
            assert!(check_rec(&a, l, 0.99, 200, 1).unwrap().passed());
            assert!(check_rip_exhaustive(&a, l.min(3), 1e-9).unwrap().passed());
        }
        let g = zero_generator(2, 12).unwrap();
        assert!(check_srec(&a, &g, 2, 1.0 - 1e-12, 0.0, 200, 3).unwrap().passed());
    }

    #[test]
    fn zero_matrix_violates_everything() {
        let a = DenseMatrix::<f64>::zeros(5, 10);
        let rip = check_rip(&a, 2, 0.5, 100, 0).unwrap();
        assert_eq!(rip.violations, 100);
        assert_eq!(rip.satisfied_fraction(), 0.0);
        assert_eq!(check_rec(&a, 2, 0.1, 100, 0).unwrap().violations, 100);
        assert_eq!(check_rec_exhaustive(&a, 2, 0.1).unwrap().violations, 45);
    }

    #[test]
    fn gaussian_rip_statistics() {
        let a = gaussian(160, 256, 0);
        assert!(check_rip(&a, 5, 0.5, 1000, 1).unwrap().satisfied_fraction() >= 0.99);
        // For a fixed unit x, ||Ax||^2 ~ chi^2_m / m, so even m = 20 keeps most
        // sampled vectors inside [0.5, 1.5]: P(chi^2_20 < 5) + P(chi^2_20 > 45) < 0.002.
        let small = gaussian(20, 256, 0);
        assert!(check_rip(&small, 5, 0.5, 1000, 1).unwrap().satisfied_fraction() >= 0.99);
        assert!(check_rip(&small, 5, 0.1, 1000, 1).unwrap().satisfied_fraction() < 0.75);
    }

    #[test]
    fn rejects_bad_parameters() {
        let a = gaussian(4, 6, 0);
        assert!(check_rip(&a, 7, 0.5, 10, 0).is_err());
        assert!(check_rip(&a, 0, 0.5, 10, 0).is_err());
        assert!(check_rec(&a, 2, -1.0, 10, 0).is_err());
        let g = zero_generator(1, 5).unwrap();
        assert!(check_srec(&a, &g, 1, 0.5, 0.0, 10, 0).is_err());
    }

    #[test]
    fn zero_generator_srec_reduces_to_rec() {
        let g = zero_generator(1, 8).unwrap();
        for seed in 0..5 {
            let a = gaussian(6, 8, seed);
            let rec = check_rec_exhaustive(&a, 2, 0.3).unwrap();
            let srec = check_srec_exhaustive(&a, &g, 1, 0.3, 0.0).unwrap();
            assert_eq!(rec.violations, srec.violations);
            assert_eq!(rec.trials, srec.trials);
            assert!((rec.worst_ratio - srec.worst_ratio).abs() < 1e-10);
            // Sampled S-REC differences are 2-sparse, so they never beat the exhaustive floor.
            let sampled = check_srec(&a, &g, 1, 0.3, 0.0, 300, seed).unwrap();
            assert!(sampled.worst_ratio >= srec.worst_ratio - 1e-10);
            assert_eq!(rec.passed(), srec.passed());
        }
    }

    #[test]
    fn srec_at_sufficient_measurements() {
        let bound = MeasurementBound::Relu {
            k: 5.0,
            l: 2.0,
            n: 50.0,
            depth: 2.0,
            width: 20.0,
        };
        let m = sufficient_measurements(bound, 0.5, 1.0).unwrap();
        let g = random_relu_generator(&[5, 20, 50], 4).unwrap();
        let a = gaussian(m, 50, 9);
        let report = check_srec(&a, &g, 2, 0.5, 0.1, 500, 2).unwrap();
        assert!(report.violations <= 5, "{report:?}");
    }

    #[test]
    fn affine_srec_matches_sampled_floor() {
        let n = 8;
        let w = DenseMatrix::from_fn(n, 2, |i, j| ((i * 3 + j * 5) % 7) as f64 / 7.0 - 0.4);
        let g = affine_generator(w, vec![0.1; n]).unwrap();
        let a = gaussian(7, n, 3);
        let exact = check_srec_exhaustive(&a, &g, 1, 0.05, 0.0).unwrap();
        let sampled = check_srec(&a, &g, 1, 0.05, 0.0, 500, 1).unwrap();
        assert!(sampled.worst_ratio >= exact.worst_ratio - 1e-10);
        let relu = random_relu_generator::<f64>(&[2, 4, n], 0).unwrap();
        assert!(check_srec_exhaustive(&a, &relu, 1, 0.5, 0.0).is_err());
    }

    #[test]
    fn exhaustive_rip_implies_rec() {
        for seed in 0..10 {
            let a = gaussian(7, 9, seed);
            let rip = check_rip_exhaustive(&a, 2, 0.8).unwrap();
            let rec = check_rec_exhaustive(&a, 2, 0.2).unwrap();
            if rip.passed() {
                assert!(rec.passed());
            }
        }
    }

    #[test]
    fn bound_constant_examples() {
        let c = bound_constants(0.5, 0.0).unwrap();
        assert_eq!((c.c0, c.c1, c.delta_prime), (8.0, 4.0, 0.0));
        let c = bound_constants(1e-12, 0.0).unwrap();
        assert!((c.c0 - 4.0).abs() < 1e-9 && (c.c1 - 2.0).abs() < 1e-9);
        assert!((bound_constants(0.9, 1.0).unwrap().delta_prime - 10.0).abs() < 1e-12);
        assert!(bound_constants(0.0, 0.0).is_err());
        assert!(bound_constants(1.0, 0.0).is_err());
    }

    #[test]
    fn sigma_examples() {
        let g = zero_generator(1, 6).unwrap();
        assert_eq!(sigma_lg(&[3.0, 1.0, 0.0, 0.0, 0.0, 0.0], &g, 1).unwrap(), 1.0);
        assert_eq!(sigma_lg(&[3.0, -1.0, 2.0, 0.5, 0.0, 7.0], &g, 6).unwrap(), 0.0);
        // A point of the model set built on a grid latent code.
        let w = DenseMatrix::from_fn(6, 2, |i, j| (i + j) as f64 * 0.1);
        let ag = affine_generator(w, vec![0.0; 6]).unwrap();
        let mut x = ag.forward(&[0.6, -1.2]).unwrap();
        x[3] += 5.0;
        assert!(sigma_lg(&x, &ag, 1).unwrap() < 1e-12);
        assert!(matches!(sigma_lg(&[0.0; 14], &zero_generator(1, 14).unwrap(), 1), Err(Error::ScaleLimit(_))));
    }

    #[test]
    fn lemma1_noiseless_model_points() {
        let e = gaussian_ensemble(8, 10, 0.0, 2).unwrap();
        let g = zero_generator(1, 10).unwrap();
        let alpha = measured_alpha(e.matrix(), &g, 1).unwrap();
        assert!(alpha < 1.0, "alpha {alpha}");
        let cfg = Lemma1Config {
            l: 1,
            alpha,
            delta: 0.0,
            eps_max: 0.0,
            mismatch: 0.0,
            trials: 20,
            seed: 1,
        };
        let report = check_lemma1_bound(&e, &g, &cfg).unwrap();
        assert_eq!(report.violations, 0);
        assert_eq!(report.tube_violations, 0);
        assert!(report.max_error < 1e-8);
    }

    #[test]
    fn lemma1_with_noise_and_mismatch() {
        let e = gaussian_ensemble(8, 10, 0.0, 5).unwrap();
        let g = zero_generator(1, 10).unwrap();
        let alpha = measured_alpha(e.matrix(), &g, 1).unwrap();
        for eps_max in [0.0, 0.05] {
            let cfg = Lemma1Config {
                l: 1,
                alpha,
                delta: 0.0,
                eps_max,
                mismatch: 0.05,
                trials: 25,
                seed: 3,
            };
            let report = check_lemma1_bound(&e, &g, &cfg).unwrap();
            assert_eq!(report.violations, 0, "{report:?}");
            assert_eq!(report.tube_violations, 0, "{report:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn sigma_nonincreasing_in_l(values in proptest::collection::vec(-5.0f64..5.0, 8)) {
            let g = zero_generator(1, 8).unwrap();
            let s: Vec<f64> = (0..=2).map(|l| sigma_lg(&values, &g, l).unwrap()).collect();
            prop_assert!(s[1] <= s[0] && s[2] <= s[1]);
        }

        #[test]
        fn constants_are_ordered(alpha in 1e-6f64..0.999, delta in 0.0f64..10.0) {
            let c = bound_constants(alpha, delta).unwrap();
            prop_assert!(c.c0 > c.c1 && c.c1 >= 2.0);
            prop_assert!(c.delta_prime >= delta);
        }

        #[test]
        fn violations_never_exceed_trials(seed in 0u64..500, trials in 0usize..50) {
            let a = gaussian(6, 10, seed);
            let r = check_rip(&a, 2, 0.3, trials, seed).unwrap();
            prop_assert!(r.violations <= r.trials);
        }
    }
}
