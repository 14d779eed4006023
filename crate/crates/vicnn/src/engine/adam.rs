use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Scalar;

/// Adam hyperparameters. Defaults: lr 1e-3, beta1 0.9, beta2 0.999, eps 1e-8.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second-moment accumulators, one flat buffer per parameter group.
#[derive(Clone, Debug)]
pub struct AdamState<T = f32> {
    pub config: AdamConfig,
    pub step: u64,
    pub m: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
}

impl<T: Scalar> AdamState<T> {
    /// Zero-initialized state for parameter groups of the given lengths.
    pub fn new(config: AdamConfig, group_lens: &[usize]) -> Self {
        AdamState {
            config,
            step: 0,
            m: group_lens.iter().map(|&n| vec![T::zero(); n]).collect(),
            v: group_lens.iter().map(|&n| vec![T::zero(); n]).collect(),
        }
    }

    /// One bias-corrected Adam update, in place. `params` and `grads` are
    /// parallel lists of parameter groups matching the state layout.
    pub fn step(&mut self, params: &mut [&mut [T]], grads: &[&[T]]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::shape(format!(
                "adam: {} parameter groups, {} gradient groups, state has {}",
                params.len(),
                grads.len(),
                self.m.len()
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let b1 = T::from_f64_(self.config.beta1);
        let b2 = T::from_f64_(self.config.beta2);
        let one = T::one();
        let eps = T::from_f64_(self.config.epsilon);
        let corr1 = T::from_f64_(1.0 - self.config.beta1.powi(t));
        let corr2 = T::from_f64_(1.0 - self.config.beta2.powi(t));
        let lr = T::from_f64_(self.config.learning_rate);

        for (gi, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            if p.len() != self.m[gi].len() || g.len() != self.m[gi].len() {
                return Err(Error::shape(format!(
                    "adam: group {gi} length mismatch ({} vs state {})",
                    p.len(),
                    self.m[gi].len()
                )));
            }
            let m = &mut self.m[gi];
            let v = &mut self.v[gi];
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (one - b1) * g[i];
                v[i] = b2 * v[i] + (one - b2) * g[i] * g[i];
                let m_hat = m[i] / corr1;
                let v_hat = v[i] / corr2;
                p[i] = p[i] - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut state = AdamState::<f64>::new(AdamConfig::default(), &[3]);
        let mut p = vec![1.0, -2.0, 0.5];
        let orig = p.clone();
        let g = vec![0.0; 3];
        state.step(&mut [&mut p], &[&g]).unwrap();
        assert_eq!(p, orig);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn first_step_moves_by_roughly_learning_rate() {
        let cfg = AdamConfig::default();
        let mut state = AdamState::<f64>::new(cfg, &[1]);
        let mut p = vec![0.0];
        state.step(&mut [&mut p[..]], &[&[2.5][..]]).unwrap();
        // bias correction makes m_hat / sqrt(v_hat) ~= sign(g) on step 1
        assert!((p[0] + cfg.learning_rate).abs() < 1e-6, "got {}", p[0]);
    }

    #[test]
    fn converges_on_scalar_quadratic() {
        // f(w) = (w - 3)^2, gradient 2 (w - 3)
        let cfg = AdamConfig {
            learning_rate: 0.1,
            ..AdamConfig::default()
        };
        let mut state = AdamState::<f64>::new(cfg, &[1]);
        let mut w = vec![0.0];
        for _ in 0..100 {
            let g = vec![2.0 * (w[0] - 3.0)];
            state.step(&mut [&mut w[..]], &[&g[..]]).unwrap();
        }
        assert!((w[0] - 3.0).abs() < 0.1, "w = {}", w[0]);
    }

    #[test]
    fn group_mismatch_is_rejected() {
        let mut state = AdamState::<f32>::new(AdamConfig::default(), &[2]);
        let mut p = vec![0.0f32; 3];
        let g = vec![0.0f32; 3];
        assert!(state.step(&mut [&mut p[..]], &[&g[..]]).is_err());
    }
}
