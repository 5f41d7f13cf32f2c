//! Flat JSON configuration files. Keys mirror the solver and training
//! settings; command-line flags override whatever a file sets.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sparsegen::recover::SolveMode;
use sparsegen::vae::TrainConfig;
use sparsegen::SolverSettings;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lambda: Option<f64>,
    pub step_size: Option<f64>,
    pub iterations: Option<usize>,
    pub restarts: Option<usize>,
    pub mode: Option<SolveMode>,
    pub clip_lo: Option<f64>,
    pub clip_hi: Option<f64>,
    /// Disables final clipping when false.
    pub clip: Option<bool>,
    pub project_latent_radius: Option<f64>,
    pub seed: Option<u64>,
    pub nu_steps: Option<usize>,
    pub warm_start: Option<bool>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lasso_mu: Option<f64>,
    pub lasso_iterations: Option<usize>,
    pub noise_std: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Invalid(format!("{}: {e}", path.display())))
    }

    pub fn load_opt(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    /// Fields set in `over` win; the rest come from `self`.
    pub fn overlay(self, over: FileConfig) -> FileConfig {
        macro_rules! pick {
            ($($f:ident),*) => { FileConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            lambda, step_size, iterations, restarts, mode, clip_lo, clip_hi, clip, project_latent_radius,
            seed, nu_steps, warm_start, learning_rate, epochs, batch_size, lasso_mu, lasso_iterations,
            noise_std
        )
    }

    pub fn solver(&self) -> SolverSettings {
        let d = SolverSettings::default();
        let (lo, hi) = d.clip.unwrap_or((0.0, 1.0));
        SolverSettings {
            lambda: self.lambda.unwrap_or(d.lambda),
            step_size: self.step_size.unwrap_or(d.step_size),
            iterations: self.iterations.unwrap_or(d.iterations),
            restarts: self.restarts.unwrap_or(d.restarts),
            mode: self.mode.unwrap_or(d.mode),
            clip: if self.clip == Some(false) {
                None
            } else {
                Some((self.clip_lo.unwrap_or(lo), self.clip_hi.unwrap_or(hi)))
            },
            project_latent_radius: self.project_latent_radius.or(d.project_latent_radius),
            seed: self.seed.unwrap_or(d.seed),
            nu_steps: self.nu_steps.unwrap_or(d.nu_steps),
            warm_start: self.warm_start.unwrap_or(d.warm_start),
        }
    }

    pub fn train(&self) -> TrainConfig {
        let d = TrainConfig::default();
        TrainConfig {
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            epochs: self.epochs.unwrap_or(d.epochs),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            seed: self.seed.unwrap_or(d.seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig =
            serde_json::from_str(r#"{"lambda": 5.0, "iterations": 20, "mode": "alternating-prox", "epochs": 3}"#).unwrap();
        let flags = FileConfig {
            lambda: Some(7.0),
            ..Default::default()
        };
        let merged = file.overlay(flags);
        let s = merged.solver();
        assert_eq!((s.lambda, s.iterations, s.mode), (7.0, 20, SolveMode::AlternatingProx));
        assert_eq!(s.restarts, 10);
        assert_eq!(merged.train().epochs, 3);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"lamda": 1}"#).is_err());
    }

    #[test]
    fn clip_can_be_disabled() {
        let c = FileConfig {
            clip: Some(false),
            ..Default::default()
        };
        assert_eq!(c.solver().clip, None);
        assert_eq!(FileConfig::default().solver().clip, Some((0.0, 1.0)));
    }
}
