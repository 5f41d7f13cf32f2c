//! Measurement ensembles and simulated noisy acquisition `y = A x + noise`.

use std::path::Path;

use crate::bytes::{put_f64, put_u32, put_u64, ByteReader};
use crate::error::{check_dim, Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::SeededRng;
use crate::scalar::Real;

const MAGIC: [u8; 4] = *b"CSEN";
const VERSION: u32 = 1;

// Stream ids keep matrix draws and noise draws independent for equal seeds.
const MATRIX_STREAM: u64 = 0x4d41_5452;
const NOISE_STREAM: u64 = 0x4e4f_4953;

/// How measurement-matrix entries are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntryDistribution {
    /// `N(0, 1/m)`: unit expected column norm.
    #[default]
    GaussianVariance,
    /// `N(0, (1/m)^2)`: standard deviation `1/m`.
    GaussianStdDev,
    /// `±1/sqrt(m)` with equal probability.
    Bernoulli,
}

impl std::str::FromStr for EntryDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "gaussian-variance" => Ok(Self::GaussianVariance),
            "gaussian-std" => Ok(Self::GaussianStdDev),
            "bernoulli" => Ok(Self::Bernoulli),
            other => Err(Error::InvalidArgument(format!(
                "unknown ensemble {other:?} (gaussian, gaussian-std, bernoulli)"
            ))),
        }
    }
}

/// A measurement matrix together with its additive noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingEnsemble<T> {
    matrix: DenseMatrix<T>,
    noise_std: T,
    seed: u64,
}

pub fn gaussian_ensemble<T: Real>(m: usize, n: usize, noise_std: T, seed: u64) -> Result<SensingEnsemble<T>> {
    SensingEnsemble::random(m, n, noise_std, seed, EntryDistribution::GaussianVariance)
}

impl<T: Real> SensingEnsemble<T> {
    pub fn random(
        m: usize,
        n: usize,
        noise_std: T,
        seed: u64,
        dist: EntryDistribution,
    ) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "ensemble dimensions must be positive, got {m}x{n}"
            )));
        }
        let mut rng = SeededRng::with_stream(seed, MATRIX_STREAM);
        let mf = m as f64;
        let data: Vec<T> = match dist {
            EntryDistribution::GaussianVariance => {
                let s = 1.0 / mf.sqrt();
                (0..m * n).map(|_| T::of(s * rng.normal())).collect()
            }
            EntryDistribution::GaussianStdDev => {
                let s = 1.0 / mf;
                (0..m * n).map(|_| T::of(s * rng.normal())).collect()
            }
            EntryDistribution::Bernoulli => {
                let s = 1.0 / mf.sqrt();
                (0..m * n)
                    .map(|_| T::of(if rng.coin() { s } else { -s }))
                    .collect()
            }
        };
        Self::new(DenseMatrix::from_vec(m, n, data)?, noise_std, seed)
    }

    pub fn new(matrix: DenseMatrix<T>, noise_std: T, seed: u64) -> Result<Self> {
        if matrix.rows() == 0 || matrix.cols() == 0 {
            return Err(Error::InvalidArgument("empty measurement matrix".into()));
        }
        if !(noise_std >= T::zero()) || !noise_std.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise std must be finite and nonnegative, got {noise_std}"
            )));
        }
        Ok(Self {
            matrix,
            noise_std,
            seed,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }

    pub fn noise_std(&self) -> T {
        self.noise_std
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of measurements `m`.
    pub fn measurements(&self) -> usize {
        self.matrix.rows()
    }

    /// Signal dimension `n`.
    pub fn signal_dim(&self) -> usize {
        self.matrix.cols()
    }

    /// `y = A x + noise`, with i.i.d. `N(0, noise_std^2)` noise drawn from `noise_seed`.
    pub fn sense(&self, x: &[T], noise_seed: u64) -> Result<Vec<T>> {
        self.check_signal(x)?;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("signal"));
        }
        let mut y = self.matrix.matvec(x)?;
        if self.noise_std > T::zero() {
            let mut rng = SeededRng::with_stream(noise_seed, NOISE_STREAM);
            for yi in y.iter_mut() {
                *yi += self.noise_std * T::of(rng.normal());
            }
        }
        Ok(y)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let (m, n) = self.matrix.shape();
        let mut out = Vec::with_capacity(32 + 8 * m * n);
        out.extend_from_slice(&MAGIC);
        put_u32(&mut out, VERSION);
        put_u64(&mut out, self.seed);
        put_u32(&mut out, m as u32);
        put_u32(&mut out, n as u32);
        put_f64(&mut out, self.noise_std.as_f64());
        for v in self.matrix.as_slice() {
            put_f64(&mut out, v.as_f64());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        r.magic(MAGIC)?;
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let seed = r.u64()?;
        let m = r.u32()? as usize;
        let n = r.u32()? as usize;
        let noise_std = T::of(r.f64()?);
        let entries = r.f64s(m * n)?;
        if r.remaining() != 0 {
            return Err(Error::ShapeMismatch(format!(
                "{} trailing bytes after {m}x{n} ensemble",
                r.remaining()
            )));
        }
        let matrix = DenseMatrix::from_vec(m, n, entries.into_iter().map(T::of).collect())?;
        Self::new(matrix, noise_std, seed)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    pub(crate) fn check_signal(&self, x: &[T]) -> Result<()> {
        check_dim(self.signal_dim(), x.len(), "signal length vs ensemble columns")
    }

    pub(crate) fn check_measurements(&self, y: &[T]) -> Result<()> {
        check_dim(self.measurements(), y.len(), "measurement count vs ensemble rows")
    }
}

/// Which measurement-count bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementBound {
    /// `k log(L r / delta) + l log(n / l)` for an `L`-Lipschitz generator on a radius-`r` ball.
    Lipschitz {
        k: f64,
        l: f64,
        n: f64,
        lipschitz: f64,
        radius: f64,
        delta: f64,
    },
    /// `(k + l) d log c + (k + l) log(n / l)` for a depth-`d` ReLU network of width at most `c`.
    Relu {
        k: f64,
        l: f64,
        n: f64,
        depth: f64,
        width: f64,
    },
}

/// `ceil(constant / alpha^2 * bound_terms)`: the sufficient number of measurements
/// with the hidden big-O constant made explicit. Natural logarithms throughout.
pub fn sufficient_measurements(bound: MeasurementBound, alpha: f64, constant: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if !(constant > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "constant must be positive, got {constant}"
        )));
    }
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
        }
    };
    let log_arg = |name: &str, v: f64| {
        if v >= 1.0 && v.is_finite() {
            Ok(v.ln())
        } else {
            Err(Error::InvalidArgument(format!(
                "log argument {name} must be at least 1, got {v}"
            )))
        }
    };
    let terms = match bound {
        MeasurementBound::Lipschitz {
            k,
            l,
            n,
            lipschitz,
            radius,
            delta,
        } => {
            for (name, v) in [("k", k), ("l", l), ("n", n), ("L", lipschitz), ("r", radius), ("delta", delta)] {
                positive(name, v)?;
            }
            if lipschitz * radius <= delta {
                return Err(Error::InvalidArgument(format!(
                    "need L*r > delta, got L*r={} delta={delta}",
                    lipschitz * radius
                )));
            }
            k * log_arg("L*r/delta", lipschitz * radius / delta)? + l * log_arg("n/l", n / l)?
        }
        MeasurementBound::Relu { k, l, n, depth, width } => {
            for (name, v) in [("k", k), ("l", l), ("n", n), ("d", depth), ("c", width)] {
                positive(name, v)?;
            }
            (k + l) * depth * log_arg("c", width)? + (k + l) * log_arg("n/l", n / l)?
        }
    };
    Ok((constant / (alpha * alpha) * terms).ceil() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gaussian_moments() {
        let e = gaussian_ensemble::<f64>(25, 100, 0.0, 7).unwrap();
        let a = e.matrix().as_slice();
        assert_eq!(a.len(), 2500);
        let mean = a.iter().sum::<f64>() / 2500.0;
        let var = a.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 2499.0;
        assert!(mean.abs() <= 0.01, "mean {mean}");
        assert!((var - 0.04).abs() <= 0.2 * 0.04, "var {var}");
    }

    #[test]
    fn shapes() {
        let e = gaussian_ensemble::<f64>(1, 1, 0.0, 0).unwrap();
        assert!(e.matrix().get(0, 0).is_finite());
        let e = gaussian_ensemble::<f64>(750, 784, 0.1, 3).unwrap();
        assert_eq!(e.matrix().shape(), (750, 784));
        assert!(gaussian_ensemble::<f64>(0, 4, 0.0, 0).is_err());
        assert!(gaussian_ensemble::<f64>(4, 0, 0.0, 0).is_err());
    }

    #[test]
    fn column_norms_concentrate() {
        let e = gaussian_ensemble::<f64>(200, 100, 0.0, 11).unwrap();
        let mean_sq: f64 = (0..100)
            .map(|j| e.matrix().column(j).iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            / 100.0;
        assert!((mean_sq - 1.0).abs() < 0.1, "{mean_sq}");
    }

    #[test]
    fn alternative_entry_scales() {
        let e = SensingEnsemble::<f64>::random(50, 40, 0.0, 1, EntryDistribution::Bernoulli).unwrap();
        let s = 1.0 / 50f64.sqrt();
        assert!(e.matrix().as_slice().iter().all(|&v| v == s || v == -s));
        let e = SensingEnsemble::<f64>::random(50, 400, 0.0, 1, EntryDistribution::GaussianStdDev).unwrap();
        let var = e.matrix().as_slice().iter().map(|x| x * x).sum::<f64>() / 20000.0;
        assert!((var - 1.0 / 2500.0).abs() < 0.1 / 2500.0, "{var}");
    }

    #[test]
    fn identity_noiseless_sensing_is_exact() {
        let e = SensingEnsemble::new(DenseMatrix::identity(4), 0.0, 0).unwrap();
        let x = [0.25, -1.0, 3.5, 0.0];
        assert_eq!(e.sense(&x, 9).unwrap(), x.to_vec());
        assert!(e.sense(&[1.0, 2.0], 9).is_err());
    }

    #[test]
    fn noise_has_requested_std_and_is_reproducible() {
        let e = SensingEnsemble::new(DenseMatrix::identity(4000), 0.1, 0).unwrap();
        let y = e.sense(&vec![0.0; 4000], 5).unwrap();
        let std = (y.iter().map(|v| v * v).sum::<f64>() / 4000.0).sqrt();
        assert!((std - 0.1).abs() < 0.005, "{std}");
        assert_eq!(y, e.sense(&vec![0.0; 4000], 5).unwrap());
        assert_ne!(y, e.sense(&vec![0.0; 4000], 6).unwrap());
    }

    #[test]
    fn ensemble_file_round_trip_and_layout() {
        let e = gaussian_ensemble::<f64>(3, 2, 0.25, 99).unwrap();
        let bytes = e.to_bytes();
        assert_eq!(&bytes[..4], b"CSEN");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 99);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[20..24].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(bytes[24..32].try_into().unwrap()), 0.25);
        assert_eq!(bytes.len(), 32 + 6 * 8);
        let back = SensingEnsemble::<f64>::from_bytes(&bytes).unwrap();
        assert_eq!(back, e);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(SensingEnsemble::<f64>::from_bytes(&bad), Err(Error::BadMagic { .. })));
        assert!(matches!(
            SensingEnsemble::<f64>::from_bytes(&bytes[..40]),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn measurement_count_examples() {
        let m = sufficient_measurements(
            MeasurementBound::Lipschitz {
                k: 20.0,
                l: 10.0,
                n: 784.0,
                lipschitz: 10.0,
                radius: 1.0,
                delta: 0.1,
            },
            0.5,
            1.0,
        )
        .unwrap();
        assert_eq!(m, 543);

        let e = std::f64::consts::E;
        let m = sufficient_measurements(
            MeasurementBound::Lipschitz {
                k: 1.0,
                l: 1.0,
                n: e,
                lipschitz: e * 0.5,
                radius: 1.0,
                delta: 0.5,
            },
            1.0,
            1.0,
        )
        .unwrap();
        assert_eq!(m, 2);

        // 4 * (30 * 2 * ln 500 + 30 * ln 78.4) = 2014.92...
        let m = sufficient_measurements(
            MeasurementBound::Relu {
                k: 20.0,
                l: 10.0,
                n: 784.0,
                depth: 2.0,
                width: 500.0,
            },
            0.5,
            1.0,
        )
        .unwrap();
        assert_eq!(m, 2015);
    }

    #[test]
    fn measurement_count_rejects_bad_inputs() {
        let base = MeasurementBound::Lipschitz {
            k: 2.0,
            l: 1.0,
            n: 10.0,
            lipschitz: 1.0,
            radius: 1.0,
            delta: 0.1,
        };
        assert!(sufficient_measurements(base, 0.0, 1.0).is_err());
        assert!(sufficient_measurements(base, 1.5, 1.0).is_err());
        let no_log = MeasurementBound::Lipschitz {
            k: 2.0,
            l: 1.0,
            n: 10.0,
            lipschitz: 1.0,
            radius: 0.1,
            delta: 0.5,
        };
        assert!(sufficient_measurements(no_log, 0.5, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn measurement_count_monotone(
            k in 1.0f64..50.0, l in 1.0f64..20.0, n in 100.0f64..2000.0,
            lip in 1.0f64..100.0, r in 1.0f64..10.0, delta in 0.01f64..0.5,
            alpha in 0.05f64..0.95, bump in 1.0f64..2.0,
        ) {
            let eval = |k: f64, l: f64, n: f64, lip: f64, r: f64, delta: f64, alpha: f64| {
                sufficient_measurements(
                    MeasurementBound::Lipschitz { k, l, n, lipschitz: lip, radius: r, delta },
                    alpha,
                    1.0,
                ).unwrap()
            };
            let base = eval(k, l, n, lip, r, delta, alpha);
            prop_assert!(eval(k * bump, l, n, lip, r, delta, alpha) >= base);
            // l log(n/l) only grows while l <= n/e.
            if l * bump <= n / std::f64::consts::E {
                prop_assert!(eval(k, l * bump, n, lip, r, delta, alpha) >= base);
            }
            prop_assert!(eval(k, l, n * bump, lip, r, delta, alpha) >= base);
            prop_assert!(eval(k, l, n, lip * bump, r, delta, alpha) >= base);
            prop_assert!(eval(k, l, n, lip, r * bump, delta, alpha) >= base);
            prop_assert!(eval(k, l, n, lip, r, delta * bump, alpha) <= base);
            prop_assert!(eval(k, l, n, lip, r, delta, (alpha * bump).min(1.0)) <= base);
        }
    }
}
