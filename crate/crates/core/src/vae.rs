//! Variational autoencoder with a Bernoulli likelihood, trained by hand-written
//! backpropagation; its decoder becomes the generator for recovery.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::genmodel::{Activation, GeneratorNetwork, LayerGrad};
use crate::linalg::DenseMatrix;
use crate::optim::{Adam, AdamConfig, AdamMoments};
use crate::rng::SeededRng;
use crate::scalar::Real;

/// Encoder producing `[mu, log sigma^2]` and a sigmoid-output decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct VaeModel<T> {
    encoder: GeneratorNetwork<T>,
    decoder: GeneratorNetwork<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            epochs: 10,
            batch_size: 100,
            seed: 0,
        }
    }
}

/// Per-epoch averages over all training examples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_neg_elbo: f64,
    pub mean_bce: f64,
    pub mean_kl: f64,
}

/// Batch-mean negative ELBO, its two terms, and parameter gradients.
#[derive(Debug, Clone)]
pub struct ElboOutput<T> {
    pub loss: T,
    pub bce: T,
    pub kl: T,
    pub encoder_grads: Vec<LayerGrad<T>>,
    pub decoder_grads: Vec<LayerGrad<T>>,
}

fn softplus<T: Real>(a: T) -> T {
    a.max(T::zero()) + (-a.abs()).exp().ln_1p()
}

impl<T: Real> VaeModel<T> {
    /// Mirrored MLPs: `input -> hidden.. -> 2*latent` and `latent -> hidden.. reversed -> input`,
    /// ReLU hidden layers, He-initialized.
    pub fn new(input_dim: usize, hidden: &[usize], latent_dim: usize, seed: u64) -> Result<Self> {
        let mut enc_dims = vec![input_dim];
        enc_dims.extend_from_slice(hidden);
        enc_dims.push(2 * latent_dim);
        let mut dec_dims = vec![latent_dim];
        dec_dims.extend(hidden.iter().rev());
        dec_dims.push(input_dim);

        let mut enc_acts = vec![Activation::Relu; hidden.len() + 1];
        *enc_acts.last_mut().unwrap() = Activation::Identity;
        let mut dec_acts = vec![Activation::Relu; hidden.len() + 1];
        *dec_acts.last_mut().unwrap() = Activation::Sigmoid;
        let mut gains = vec![2.0; hidden.len() + 1];
        *gains.last_mut().unwrap() = 1.0;

        let mut rng = SeededRng::new(seed);
        let encoder = GeneratorNetwork::random_scaled(&enc_dims, &enc_acts, rng.next_u64(), &gains)?;
        let decoder = GeneratorNetwork::random_scaled(&dec_dims, &dec_acts, rng.next_u64(), &gains)?;
        Self::from_parts(encoder, decoder)
    }

    /// 784-500-500-20 encoder and decoder (encoder head has 40 units).
    pub fn mnist(seed: u64) -> Result<Self> {
        Self::new(784, &[500, 500], 20, seed)
    }

    pub fn from_parts(encoder: GeneratorNetwork<T>, decoder: GeneratorNetwork<T>) -> Result<Self> {
        check_dim(2 * decoder.latent_dim(), encoder.output_dim(), "encoder head vs 2 x latent")?;
        check_dim(encoder.latent_dim(), decoder.output_dim(), "decoder output vs data dim")?;
        Ok(Self { encoder, decoder })
    }

    pub fn encoder(&self) -> &GeneratorNetwork<T> {
        &self.encoder
    }

    pub fn decoder(&self) -> &GeneratorNetwork<T> {
        &self.decoder
    }

    pub fn latent_dim(&self) -> usize {
        self.decoder.latent_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.latent_dim()
    }

    fn check_batch(&self, batch: &DenseMatrix<T>) -> Result<()> {
        check_dim(self.input_dim(), batch.cols(), "batch width vs VAE input")?;
        if batch.rows() == 0 {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        if batch
            .as_slice()
            .iter()
            .any(|&p| !(p >= T::zero() && p <= T::one()))
        {
            return Err(Error::InvalidArgument("pixel intensities must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Single-sample negative ELBO with reparameterization noise drawn from `rng`.
    pub fn elbo(&self, batch: &DenseMatrix<T>, rng: &mut SeededRng) -> Result<ElboOutput<T>> {
        let k = self.latent_dim();
        let eta = DenseMatrix::from_fn(batch.rows(), k, |_, _| T::of(rng.normal()));
        self.elbo_with_noise(batch, &eta)
    }

    /// Negative ELBO for a fixed reparameterization draw `eta` (one row per example).
    ///
    /// Loss per example is `sum_i softplus(a_i) - x_i a_i` over decoder logits
    /// `a` plus `KL(N(mu, sigma^2) || N(0, I))`; the result is the batch mean.
    pub fn elbo_with_noise(&self, batch: &DenseMatrix<T>, eta: &DenseMatrix<T>) -> Result<ElboOutput<T>> {
        self.check_batch(batch)?;
        let (b, k) = (batch.rows(), self.latent_dim());
        check_dim(b, eta.rows(), "noise rows vs batch")?;
        check_dim(k, eta.cols(), "noise width vs latent dim")?;
        let inv_b = T::one() / T::of(b as f64);
        let half = T::of(0.5);

        let enc = self.encoder.forward_batch(batch)?;
        let head = enc.output();
        let mut z = DenseMatrix::zeros(b, k);
        let mut sigma = DenseMatrix::zeros(b, k);
        let mut kl = T::zero();
        for r in 0..b {
            let (mu, logvar) = head.row(r).split_at(k);
            for j in 0..k {
                let s = (half * logvar[j]).exp();
                sigma.set(r, j, s);
                z.set(r, j, mu[j] + s * eta.get(r, j));
                kl += half * (mu[j] * mu[j] + s * s - logvar[j] - T::one());
            }
        }

        let dec = self.decoder.forward_batch(&z)?;
        let logits = dec.output_preactivation();
        let probs = dec.output();
        let mut bce = T::zero();
        let mut dlogits = DenseMatrix::zeros(b, self.input_dim());
        for ((a, p), (x, d)) in logits
            .as_slice()
            .iter()
            .zip(probs.as_slice())
            .zip(batch.as_slice().iter().zip(dlogits.as_mut_slice()))
        {
            bce += softplus(*a) - *x * *a;
            *d = (*p - *x) * inv_b;
        }

        let (dz, dec_grads) = self.decoder.backward_from_preactivation(&dec, dlogits, true);
        let mut dhead = DenseMatrix::zeros(b, 2 * k);
        for r in 0..b {
            let (mu, logvar) = head.row(r).split_at(k);
            let (mu, logvar) = (mu.to_vec(), logvar.to_vec());
            let row = dhead.row_mut(r);
            for j in 0..k {
                let g = dz.get(r, j);
                let s = sigma.get(r, j);
                row[j] = g + mu[j] * inv_b;
                row[k + j] = g * eta.get(r, j) * half * s + half * (logvar[j].exp() - T::one()) * inv_b;
            }
        }
        let (_, enc_grads) = self.encoder.backward(&enc, &dhead, true);

        Ok(ElboOutput {
            loss: (bce + kl) * inv_b,
            bce: bce * inv_b,
            kl: kl * inv_b,
            encoder_grads: enc_grads.unwrap_or_default(),
            decoder_grads: dec_grads.unwrap_or_default(),
        })
    }

    /// Decoder mean at the posterior mean: a deterministic reconstruction.
    pub fn reconstruct(&self, x: &[T]) -> Result<Vec<T>> {
        let batch = DenseMatrix::from_vec(1, x.len(), x.to_vec())?;
        self.check_batch(&batch)?;
        let head = self.encoder.forward(x)?;
        self.decoder.forward(&head[..self.latent_dim()])
    }

    fn nets_mut(&mut self) -> [&mut GeneratorNetwork<T>; 2] {
        [&mut self.encoder, &mut self.decoder]
    }
}

/// The trained decoder, used as the generator `G` during recovery.
pub fn decoder_of<T: Real>(model: &VaeModel<T>) -> GeneratorNetwork<T> {
    model.decoder.clone()
}

/// Minibatch Adam on the negative ELBO; returns the trained model and per-epoch averages.
///
/// Shuffling and reparameterization noise come from `cfg.seed`, so equal
/// seeds reproduce the same weights bit for bit.
pub fn train<T: Real>(
    model: &VaeModel<T>,
    dataset: &DenseMatrix<T>,
    cfg: &TrainConfig,
) -> Result<(VaeModel<T>, Vec<EpochStats>)> {
    if dataset.rows() == 0 {
        return Err(Error::InvalidArgument("training set is empty".into()));
    }
    if !(cfg.learning_rate > 0.0) || cfg.batch_size == 0 {
        return Err(Error::InvalidArgument(
            "learning rate and batch size must be positive".into(),
        ));
    }
    model.check_batch(dataset)?;
    let mut model = model.clone();
    let mut adam = Adam::new(AdamConfig::with_learning_rate(T::of(cfg.learning_rate)));
    let mut moments: Vec<[AdamMoments<T>; 2]> = model
        .nets_mut()
        .into_iter()
        .flat_map(|net| {
            net.layers()
                .iter()
                .map(|l| {
                    [
                        AdamMoments::new(l.weight().as_slice().len()),
                        AdamMoments::new(l.bias().len()),
                    ]
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let mut shuffle_rng = SeededRng::with_stream(cfg.seed, 1);
    let mut noise_rng = SeededRng::with_stream(cfg.seed, 2);
    let n = dataset.rows();
    let width = dataset.cols();
    let mut order: Vec<usize> = (0..n).collect();
    let mut stats = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        let (mut sum_loss, mut sum_bce, mut sum_kl) = (0.0, 0.0, 0.0);
        for chunk in order.chunks(cfg.batch_size) {
            let mut batch = DenseMatrix::zeros(chunk.len(), width);
            for (r, &i) in chunk.iter().enumerate() {
                batch.row_mut(r).copy_from_slice(dataset.row(i));
            }
            let out = model.elbo(&batch, &mut noise_rng)?;
            if !out.loss.is_finite() {
                return Err(Error::NonFinite("VAE training loss"));
            }
            let w = chunk.len() as f64;
            sum_loss += out.loss.as_f64() * w;
            sum_bce += out.bce.as_f64() * w;
            sum_kl += out.kl.as_f64() * w;

            adam.begin_step();
            let grads = out.encoder_grads.iter().chain(&out.decoder_grads);
            let layers = model
                .nets_mut()
                .into_iter()
                .flat_map(|net| net.layers_mut().iter_mut());
            for ((layer, grad), mom) in layers.zip(grads).zip(moments.iter_mut()) {
                let (wp, bp) = layer.params_mut();
                let [mw, mb] = mom;
                adam.update(wp, grad.weight.as_slice(), mw);
                adam.update(bp, &grad.bias, mb);
            }
        }
        let nf = n as f64;
        stats.push(EpochStats {
            epoch,
            mean_neg_elbo: sum_loss / nf,
            mean_bce: sum_bce / nf,
            mean_kl: sum_kl / nf,
        });
    }
    Ok((model, stats))
}
