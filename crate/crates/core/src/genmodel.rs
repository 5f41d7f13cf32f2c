//! Feed-forward generator networks `G: R^k -> R^n` with exact reverse-mode gradients.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bytes::{put_f64, put_u32, ByteReader};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{gemm, top_singular_value, DenseMatrix};
use crate::rng::SeededRng;
use crate::scalar::Real;

const MAGIC: [u8; 4] = *b"MLPW";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
}

impl Activation {
    pub fn code(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
            Activation::Sigmoid => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Relu),
            2 => Some(Activation::Sigmoid),
            _ => None,
        }
    }

    /// Lipschitz constant of the scalar activation.
    pub fn lipschitz<T: Real>(self) -> T {
        match self {
            Activation::Identity | Activation::Relu => T::one(),
            Activation::Sigmoid => T::of(0.25),
        }
    }

    fn apply<T: Real>(self, x: T) -> T {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(T::zero()),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative given the pre-activation and the activation output.
    /// The ReLU derivative at exactly 0 is taken as 0.
    fn derivative<T: Real>(self, pre: T, post: T) -> T {
        match self {
            Activation::Identity => T::one(),
            Activation::Relu => {
                if pre > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Sigmoid => post * (T::one() - post),
        }
    }
}

pub(crate) fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// One affine map followed by an elementwise activation: `act(W x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    weight: DenseMatrix<T>,
    bias: Vec<T>,
    activation: Activation,
}

impl<T: Real> Layer<T> {
    /// `weight` is `out x in`.
    pub fn new(weight: DenseMatrix<T>, bias: Vec<T>, activation: Activation) -> Result<Self> {
        check_dim(weight.rows(), bias.len(), "bias length vs layer outputs")?;
        if weight.rows() == 0 || weight.cols() == 0 {
            return Err(Error::ShapeMismatch("layer with zero width".into()));
        }
        if !bias.iter().all(|b| b.is_finite()) {
            return Err(Error::NonFinite("layer bias"));
        }
        Ok(Self {
            weight,
            bias,
            activation,
        })
    }

    pub fn weight(&self) -> &DenseMatrix<T> {
        &self.weight
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn inputs(&self) -> usize {
        self.weight.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.rows()
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [T], &mut [T]) {
        (self.weight.as_mut_slice(), &mut self.bias)
    }
}

/// Parameter gradients for one layer, shaped like the layer.
#[derive(Debug, Clone)]
pub struct LayerGrad<T> {
    pub weight: DenseMatrix<T>,
    pub bias: Vec<T>,
}

/// Activations recorded by a batched forward pass, consumed by the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    input: DenseMatrix<T>,
    pre: Vec<DenseMatrix<T>>,
    post: Vec<DenseMatrix<T>>,
}

impl<T: Real> ForwardTrace<T> {
    /// Network outputs, one row per batch entry.
    pub fn output(&self) -> &DenseMatrix<T> {
        self.post.last().unwrap_or(&self.input)
    }

    /// Pre-activation values of the final layer.
    pub fn output_preactivation(&self) -> &DenseMatrix<T> {
        self.pre.last().unwrap_or(&self.input)
    }
}

/// A multilayer perceptron used as a generator function.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorNetwork<T> {
    layers: Vec<Layer<T>>,
}

impl<T: Real> GeneratorNetwork<T> {
    pub fn new(layers: Vec<Layer<T>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::ShapeMismatch("network needs at least one layer".into()));
        }
        for w in layers.windows(2) {
            if w[0].outputs() != w[1].inputs() {
                return Err(Error::ShapeMismatch(format!(
                    "layer outputs {} do not feed next layer inputs {}",
                    w[0].outputs(),
                    w[1].inputs()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Random network with `N(0, 2 / fan_in)` weights and zero biases.
    pub fn random(dims: &[usize], activations: &[Activation], seed: u64) -> Result<Self> {
        Self::random_scaled(dims, activations, seed, &vec![2.0; activations.len()])
    }

    /// Random network with `N(0, gain_i / fan_in)` weights per layer and zero biases.
    pub fn random_scaled(
        dims: &[usize],
        activations: &[Activation],
        seed: u64,
        gains: &[f64],
    ) -> Result<Self> {
        if dims.len() < 2 || activations.len() != dims.len() - 1 || gains.len() != activations.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} dims need {} activations, got {}",
                dims.len(),
                dims.len().saturating_sub(1),
                activations.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::ShapeMismatch("zero layer width".into()));
        }
        let mut rng = SeededRng::new(seed);
        let layers = dims
            .windows(2)
            .zip(activations.iter().zip(gains))
            .map(|(d, (&act, &gain))| {
                let (fan_in, fan_out) = (d[0], d[1]);
                let s = (gain / fan_in as f64).sqrt();
                let w = DenseMatrix::from_fn(fan_out, fan_in, |_, _| T::of(s * rng.normal()));
                Layer::new(w, vec![T::zero(); fan_out], act)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer<T>] {
        &mut self.layers
    }

    pub fn latent_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().outputs()
    }

    /// `[k, h1, ..., n]`
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.latent_dim())
            .chain(self.layers.iter().map(Layer::outputs))
            .collect()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// True when every weight is zero, i.e. `G` maps all latents to one point.
    pub fn is_constant(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.as_slice().iter().all(|w| *w == T::zero()))
    }

    pub fn forward(&self, z: &[T]) -> Result<Vec<T>> {
        check_dim(self.latent_dim(), z.len(), "latent code length")?;
        let zb = DenseMatrix::from_vec(1, z.len(), z.to_vec())?;
        Ok(self.forward_batch(&zb)?.output().as_slice().to_vec())
    }

    /// Evaluates the network on every row of `z`, keeping activations for backpropagation.
    pub fn forward_batch(&self, z: &DenseMatrix<T>) -> Result<ForwardTrace<T>> {
        check_dim(self.latent_dim(), z.cols(), "latent batch width")?;
        let batch = z.rows();
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post: Vec<DenseMatrix<T>> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let input = post.last().unwrap_or(z);
            let mut a = DenseMatrix::zeros(batch, layer.outputs());
            for r in 0..batch {
                a.row_mut(r).copy_from_slice(&layer.bias);
            }
            gemm(T::one(), input, false, &layer.weight, true, T::one(), &mut a);
            let mut h = a.clone();
            let act = layer.activation;
            h.as_mut_slice().iter_mut().for_each(|x| *x = act.apply(*x));
            pre.push(a);
            post.push(h);
        }
        Ok(ForwardTrace {
            input: z.clone(),
            pre,
            post,
        })
    }

    /// Backpropagates a gradient with respect to the final layer's pre-activation.
    ///
    /// Returns the gradient with respect to the network input and, when
    /// requested, per-layer parameter gradients.
    pub fn backward_from_preactivation(
        &self,
        trace: &ForwardTrace<T>,
        mut delta: DenseMatrix<T>,
        param_grads: bool,
    ) -> (DenseMatrix<T>, Option<Vec<LayerGrad<T>>>) {
        let mut grads = Vec::new();
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            let input = if idx == 0 { &trace.input } else { &trace.post[idx - 1] };
            if param_grads {
                let mut gw = DenseMatrix::zeros(layer.outputs(), layer.inputs());
                gemm(T::one(), &delta, true, input, false, T::zero(), &mut gw);
                let mut gb = vec![T::zero(); layer.outputs()];
                for r in 0..delta.rows() {
                    gb.iter_mut().zip(delta.row(r)).for_each(|(g, d)| *g += *d);
                }
                grads.push(LayerGrad { weight: gw, bias: gb });
            }
            let mut gin = DenseMatrix::zeros(delta.rows(), layer.inputs());
            gemm(T::one(), &delta, false, &layer.weight, false, T::zero(), &mut gin);
            if idx > 0 {
                let prev = &self.layers[idx - 1];
                let (p, h) = (&trace.pre[idx - 1], &trace.post[idx - 1]);
                let act = prev.activation;
                gin.as_mut_slice()
                    .iter_mut()
                    .zip(p.as_slice().iter().zip(h.as_slice()))
                    .for_each(|(g, (pv, hv))| *g *= act.derivative(*pv, *hv));
            }
            delta = gin;
        }
        grads.reverse();
        (delta, param_grads.then_some(grads))
    }

    /// Batched vector-Jacobian product: row `i` of the result is `J(z_i)^T u_i`.
    pub fn vjp_batch(&self, trace: &ForwardTrace<T>, cotangent: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let out = trace.output();
        check_dim(out.rows(), cotangent.rows(), "cotangent batch size")?;
        check_dim(out.cols(), cotangent.cols(), "cotangent width")?;
        Ok(self
            .backward(trace, cotangent, false)
            .0)
    }

    /// Backpropagates a gradient with respect to the network output.
    pub fn backward(
        &self,
        trace: &ForwardTrace<T>,
        cotangent: &DenseMatrix<T>,
        param_grads: bool,
    ) -> (DenseMatrix<T>, Option<Vec<LayerGrad<T>>>) {
        let last = self.layers.last().unwrap();
        let mut delta = cotangent.clone();
        let act = last.activation;
        delta
            .as_mut_slice()
            .iter_mut()
            .zip(trace.output_preactivation().as_slice().iter().zip(trace.output().as_slice()))
            .for_each(|(g, (p, h))| *g *= act.derivative(*p, *h));
        self.backward_from_preactivation(trace, delta, param_grads)
    }

    /// `J(z)^T u` where `J = dG/dz`.
    pub fn vjp(&self, z: &[T], cotangent: &[T]) -> Result<Vec<T>> {
        check_dim(self.latent_dim(), z.len(), "latent code length")?;
        check_dim(self.output_dim(), cotangent.len(), "cotangent length")?;
        let trace = self.forward_batch(&DenseMatrix::from_vec(1, z.len(), z.to_vec())?)?;
        let u = DenseMatrix::from_vec(1, cotangent.len(), cotangent.to_vec())?;
        Ok(self.vjp_batch(&trace, &u)?.into_vec())
    }

    /// Upper bound on the Lipschitz constant: product of layer spectral norms
    /// (power iteration, 50 steps, tol 1e-8) times activation constants.
    pub fn lipschitz_upper(&self) -> T {
        self.layers
            .iter()
            .map(|l| top_singular_value(&l.weight, 50, T::of(1e-8)) * l.activation.lipschitz::<T>())
            .fold(T::one(), |acc, x| acc * x)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        put_u32(&mut out, VERSION);
        put_u32(&mut out, self.layers.len() as u32);
        for d in self.dims() {
            put_u32(&mut out, d as u32);
        }
        for l in &self.layers {
            out.push(l.activation.code());
        }
        for l in &self.layers {
            for w in l.weight.as_slice() {
                put_f64(&mut out, w.as_f64());
            }
            for b in &l.bias {
                put_f64(&mut out, b.as_f64());
            }
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
        let depth = r.u32()? as usize;
        if depth == 0 {
            return Err(Error::ShapeMismatch("zero layers".into()));
        }
        let dims = (0..=depth).map(|_| Ok(r.u32()? as usize)).collect::<Result<Vec<_>>>()?;
        if dims.contains(&0) {
            return Err(Error::ShapeMismatch(format!("zero width in dims {dims:?}")));
        }
        let acts = (0..depth)
            .map(|_| {
                let c = r.u8()?;
                Activation::from_code(c)
                    .ok_or_else(|| Error::ShapeMismatch(format!("unknown activation code {c}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut layers = Vec::with_capacity(depth);
        for (d, act) in dims.windows(2).zip(acts) {
            let (fan_in, fan_out) = (d[0], d[1]);
            let w = r.f64s(fan_in * fan_out)?;
            let b = r.f64s(fan_out)?;
            layers.push(Layer::new(
                DenseMatrix::from_vec(fan_out, fan_in, w.into_iter().map(T::of).collect())?,
                b.into_iter().map(T::of).collect(),
                act,
            )?);
        }
        if r.remaining() != 0 {
            return Err(Error::ShapeMismatch(format!(
                "{} trailing bytes after declared layers",
                r.remaining()
            )));
        }
        Self::new(layers)
    }

    pub fn save_weights(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load_weights(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// `G(z) = 0` for every `z`: turns the joint objective into plain LASSO.
pub fn zero_generator<T: Real>(k: usize, n: usize) -> Result<GeneratorNetwork<T>> {
    GeneratorNetwork::new(vec![Layer::new(
        DenseMatrix::zeros(n, k),
        vec![T::zero(); n],
        Activation::Identity,
    )?])
}

/// `G(z) = W z + b`.
pub fn affine_generator<T: Real>(weight: DenseMatrix<T>, bias: Vec<T>) -> Result<GeneratorNetwork<T>> {
    GeneratorNetwork::new(vec![Layer::new(weight, bias, Activation::Identity)?])
}

/// ReLU hidden layers and a linear output, He-initialized from `seed`.
pub fn random_relu_generator<T: Real>(dims: &[usize], seed: u64) -> Result<GeneratorNetwork<T>> {
    if dims.len() < 2 {
        return Err(Error::ShapeMismatch("need at least input and output dims".into()));
    }
    let mut acts = vec![Activation::Relu; dims.len() - 1];
    *acts.last_mut().unwrap() = Activation::Identity;
    GeneratorNetwork::random(dims, &acts, seed)
}
