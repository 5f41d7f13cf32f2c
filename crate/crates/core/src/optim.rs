//! Adam (Kingma & Ba) over flat parameter slices.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
}

impl<T: Real> AdamConfig<T> {
    pub fn with_learning_rate(learning_rate: T) -> Self {
        Self {
            learning_rate,
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            eps: T::of(1e-8),
        }
    }
}

/// Shared step counter and bias-correction factors for a group of parameter blocks.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    cfg: AdamConfig<T>,
    step: i32,
    correction1: T,
    correction2: T,
}

/// First and second moment estimates for one parameter block.
#[derive(Debug, Clone)]
pub struct AdamMoments<T> {
    m: Vec<T>,
    v: Vec<T>,
}

impl<T: Real> AdamMoments<T> {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![T::zero(); len],
            v: vec![T::zero(); len],
        }
    }
}

impl<T: Real> Adam<T> {
    pub fn new(cfg: AdamConfig<T>) -> Self {
        Self {
            cfg,
            step: 0,
            correction1: T::one(),
            correction2: T::one(),
        }
    }

    pub fn config(&self) -> &AdamConfig<T> {
        &self.cfg
    }

    /// Advances the step counter; call once per optimizer step before any `update`.
    pub fn begin_step(&mut self) {
        self.step += 1;
        self.correction1 = T::one() - self.cfg.beta1.powi(self.step);
        self.correction2 = T::one() - self.cfg.beta2.powi(self.step);
    }

    pub fn update(&self, params: &mut [T], grads: &[T], moments: &mut AdamMoments<T>) {
        debug_assert!(self.step > 0, "begin_step must precede update");
        debug_assert_eq!(params.len(), grads.len());
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            eps,
        } = self.cfg;
        let (c1, c2) = (self.correction1, self.correction2);
        let it = params
            .iter_mut()
            .zip(grads)
            .zip(moments.m.iter_mut().zip(moments.v.iter_mut()));
        for ((p, &g), (m, v)) in it {
            *m = beta1 * *m + (T::one() - beta1) * g;
            *v = beta2 * *v + (T::one() - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        // With bias correction the first update is lr * g / (|g| + eps).
        let mut adam = Adam::new(AdamConfig::with_learning_rate(0.1));
        let mut p = vec![1.0f64, -1.0, 0.0];
        let mut mom = AdamMoments::new(3);
        adam.begin_step();
        adam.update(&mut p, &[2.0, -0.5, 0.0], &mut mom);
        assert!((p[0] - 0.9).abs() < 1e-7);
        assert!((p[1] + 0.9).abs() < 1e-7);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let mut adam = Adam::new(AdamConfig::with_learning_rate(0.05));
        let mut p = vec![3.0f64, -2.0];
        let mut mom = AdamMoments::new(2);
        for _ in 0..2000 {
            let g = [2.0 * (p[0] - 1.0), 4.0 * (p[1] + 0.5)];
            adam.begin_step();
            adam.update(&mut p, &g, &mut mom);
        }
        assert!((p[0] - 1.0).abs() < 1e-3 && (p[1] + 0.5).abs() < 1e-3);
    }
}
