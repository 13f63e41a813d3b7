use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Adam moment accumulators, mirroring the flat parameter layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
    pub lr: f64,
}

impl OptimizerState {
    pub fn new(n_params: usize, lr: f64) -> Result<Self> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {lr}"
            )));
        }
        Ok(OptimizerState {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            step: 0,
            lr,
        })
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "optimizer holds {} moments, got {} parameters and {} gradients",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - BETA1.powi(t);
        let c2 = 1.0 - BETA2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = BETA1 * self.m[i] + (1.0 - BETA1) * g;
            self.v[i] = BETA2 * self.v[i] + (1.0 - BETA2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + EPSILON);
        }
        Ok(())
    }
}

/// Functional form of [`OptimizerState::step`].
pub fn adam_step(
    mut state: OptimizerState,
    mut params: Vec<f64>,
    grads: &[f64],
) -> Result<(OptimizerState, Vec<f64>)> {
    state.step(&mut params, grads)?;
    Ok((state, params))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_keeps_parameters() {
        let s = OptimizerState::new(3, 0.005).unwrap();
        let (s, p) = adam_step(s, vec![1.0, -2.0, 0.5], &[0.0; 3]).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let s = OptimizerState::new(1, 0.005).unwrap();
        let (_, p) = adam_step(s, vec![1.0], &[0.1]).unwrap();
        // m_hat = 0.1, v_hat = 0.01
        let expected = 1.0 - 0.005 * 0.1 / (0.1 + 1e-8);
        assert!((p[0] - expected).abs() < 1e-15);
        assert!((p[0] - 0.995).abs() < 1e-9);
    }

    #[test]
    fn deterministic() {
        let s = OptimizerState::new(2, 0.01).unwrap();
        let a = adam_step(s.clone(), vec![0.3, 0.4], &[0.2, -0.7]).unwrap();
        let b = adam_step(s, vec![0.3, 0.4], &[0.2, -0.7]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let s = OptimizerState::new(2, 0.01).unwrap();
        assert!(adam_step(s, vec![0.0; 3], &[0.0; 3]).is_err());
        assert!(OptimizerState::new(1, 0.0).is_err());
    }
}
